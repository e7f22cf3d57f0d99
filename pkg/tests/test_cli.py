"""Command-line front end, driven through cli.main with argv lists.

Running in-process keeps exit codes and the one-line JSON stderr
diagnostics assertable without subprocesses.  The network case uses a
shrunk two-channel configuration so the whole module stays fast.
"""

import json
import os
import re

import pytest

from gascore import __version__, cli

PROBE_HEADER = "time,temperature,velocity,mass_flow"

# two channels, nine nodes, loose steady tolerance: seconds, not minutes
SMALL_LOFA = {
    "kind": "lofa",
    "duration": 30.0,
    "output_cadence": 5.0,
    "snapshot_times": [20.0],
    "steady": {"window": 5.0, "tolerance": 1.0e-3, "max_time": 600.0},
    "geometry": {"axial_nodes": 9},
    "network": {"power_factors": [0.9, 1.1],
                "lateral_links": [[0, 1, 200.0]],
                "periphery_links": [[0, 2.0]]},
    "probes": [
        {"channel": 0, "axial_fraction": 0.5, "medium": "fluid"},
        {"channel": 1, "axial_fraction": 0.5, "medium": "fuel"},
    ],
    "lines": [{"name": "mid", "points": [[0, 0.5], [1, 0.5]]}],
}

FULL_RUN_FILES = [
    "line_mid_t20.csv",
    "manifest.json",
    "steady_checkpoint.json",
    "steady_convergence.csv",
    "steady_probe_ch0_fluid_0.5.csv",
    "steady_probe_ch1_fuel_0.5.csv",
    "steady_system.csv",
    "transient_probe_ch0_fluid_0.5.csv",
    "transient_probe_ch1_fuel_0.5.csv",
    "transient_system.csv",
]


def run_cli(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def stderr_payload(err):
    lines = [ln for ln in err.splitlines() if ln.strip()]
    assert len(lines) == 1, err
    return json.loads(lines[0])


def read_manifest(out_dir):
    with open(os.path.join(str(out_dir), "manifest.json"),
              encoding="utf-8") as f:
        return json.load(f)


def first_line(path):
    with open(path, encoding="utf-8") as f:
        return f.readline().rstrip("\n")


@pytest.fixture(scope="module")
def lofa_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli_lofa")
    cfg = base / "small.json"
    cfg.write_text(json.dumps(SMALL_LOFA), encoding="utf-8")
    out = base / "run1"
    code = cli.main(["run-lofa", "--config", str(cfg), "--out", str(out),
                     "--seed-check"])
    return code, cfg, out


class TestProps:
    def test_writes_a_readable_table(self, tmp_path, capsys):
        out = tmp_path / "helium.csv"
        code, stdout, err = run_cli(["props", "--out", str(out)], capsys)
        assert code == 0 and err == ""
        assert stdout.startswith("props: 1001 samples")
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "T,rho,mu,lambda,cp,h"
        assert len(lines) == 1002
        row = [float(v) for v in lines[1].split(",")]
        assert row[0] == 500.0 and all(v > 0.0 for v in row)

    def test_creates_missing_parent_directories(self, tmp_path, capsys):
        out = tmp_path / "tables" / "he.csv"
        code, _, _ = run_cli(["props", "--out", str(out)], capsys)
        assert code == 0 and out.exists()

    @pytest.mark.parametrize("argv, needle", [
        (["props", "--spacing", "0", "--out", "x.csv"], "--spacing"),
        (["props", "--t-min", "900", "--t-max", "800", "--out", "x.csv"],
         "--t-max"),
    ])
    def test_bad_ranges_exit_two(self, argv, needle, capsys):
        code, _, err = run_cli(argv, capsys)
        assert code == 2
        payload = stderr_payload(err)
        assert payload["error"] == "config" and needle in payload["message"]


class TestGenTable:
    def test_aided_ratio_table(self, tmp_path, capsys):
        out = tmp_path / "aided.csv"
        code, stdout, _ = run_cli(["gen-table", "ratio", "--out", str(out)],
                                  capsys)
        assert code == 0 and "aided ratio table" in stdout
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# orientation=aided"
        assert lines[1] == "# C=125000"
        # the aided branch folds over, so its cap is recorded
        assert lines[2].startswith("# cap_point=")
        assert lines[3].startswith("# saturation_ratio=")
        assert lines[4] == "Bo*,ratio"
        b, r = (float(v) for v in lines[5].split(","))
        assert b > 0.0 and 0.0 < r <= 1.0

    def test_opposed_table_with_custom_constant(self, tmp_path, capsys):
        out = tmp_path / "opp.csv"
        code, _, _ = run_cli(
            ["gen-table", "ratio", "--orientation", "opposed",
             "--c", "2.5e5", "--out", str(out)], capsys)
        assert code == 0
        text = out.read_text(encoding="utf-8")
        assert "# orientation=opposed" in text
        assert "# C=250000" in text
        assert "# cap_point" not in text

    def test_conditions_table(self, tmp_path, capsys):
        out = tmp_path / "cond.csv"
        code, stdout, _ = run_cli(
            ["gen-table", "conditions", "--out", str(out)], capsys)
        assert code == 0 and "6 scaled flow conditions" in stdout
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == ("velocity,heat_flux,reynolds,bo_reference,"
                            "bo_scaled,aided_ratio,opposed_ratio")
        assert len(lines) == 7


class TestRunRamp:
    def test_default_matrix(self, tmp_path, capsys):
        code, stdout, _ = run_cli(["run-ramp", "--out", str(tmp_path)],
                                  capsys)
        assert code == 0 and "18 rows" in stdout
        names = sorted(os.listdir(tmp_path))
        csvs = [n for n in names if n.endswith(".csv")]
        assert len(csvs) == 18 and "manifest.json" in names
        pattern = re.compile(r"^ramp_(up|down)_\d+C_tau[0-9.]+\.csv$")
        assert all(pattern.match(n) for n in csvs)
        assert "ramp_up_500C_tau1.csv" in csvs
        assert first_line(tmp_path / csvs[0]) == \
            "time,velocity,cf_quasi_steady,cf_brunone"
        manifest = read_manifest(tmp_path)
        assert manifest["command"] == "run-ramp"
        assert manifest["scenario_kind"] == "ramp"
        assert manifest["artifact_version"] == __version__
        assert manifest["outputs"] == csvs
        assert manifest["audits"] == {"rows": 18, "seed_check": False}
        assert len(manifest["config_hash"]) == 18
        assert all(len(h) == 64 for h in manifest["config_hash"])

    def test_rejects_a_config_of_the_wrong_kind(self, tmp_path, capsys):
        cfg = tmp_path / "pipe.json"
        cfg.write_text(json.dumps({"kind": "pipe"}), encoding="utf-8")
        code, _, err = run_cli(
            ["run-ramp", "--config", str(cfg), "--out",
             str(tmp_path / "o")], capsys)
        assert code == 2
        assert "does not fit run-ramp" in stderr_payload(err)["message"]

    def test_seed_check_catches_unstable_output(self, tmp_path, capsys,
                                                monkeypatch):
        # fault injection: the repeat pass writes one extra byte, which
        # the byte-for-byte audit must flag as exit code 1
        real = cli.write_ramp_csv
        calls = {"n": 0}

        def flaky(result, path):
            real(result, path)
            calls["n"] += 1
            if calls["n"] > 18:
                with open(path, "a", encoding="utf-8") as f:
                    f.write("#\n")

        monkeypatch.setattr(cli, "write_ramp_csv", flaky)
        code, _, err = run_cli(
            ["run-ramp", "--out", str(tmp_path), "--seed-check"], capsys)
        assert code == 1
        payload = stderr_payload(err)
        assert payload["error"] == "audit"
        assert "different bytes" in payload["message"]


class TestRunPipe:
    def test_run_with_seed_check(self, tmp_path, capsys):
        code, stdout, _ = run_cli(
            ["run-pipe", "--out", str(tmp_path), "--seed-check"], capsys)
        assert code == 0 and stdout.startswith("run-pipe: dp corrected")
        assert sorted(os.listdir(tmp_path)) == [
            "manifest.json", "pipe_corrected.csv", "pipe_uncorrected.csv"]
        assert first_line(tmp_path / "pipe_corrected.csv") == \
            "position,t_bulk,t_wall,pressure,cf,nu"
        manifest = read_manifest(tmp_path)
        audits = manifest["audits"]
        assert audits["seed_check"] is True
        assert audits["wall_iterations"] <= 20
        assert audits["dp_total_corrected"] < audits["dp_total_uncorrected"]
        assert audits["mass_flow"] > 0.0
        assert audits["outlet_t_bulk"] == pytest.approx(1215.0, abs=5.0)
        assert len(manifest["config_hash"]) == 64

    def test_bundled_config(self, capsys, tmp_path):
        cfg = os.path.join(os.path.dirname(__file__), os.pardir, "configs",
                           "pipe.json")
        code, _, _ = run_cli(
            ["run-pipe", "--config", cfg, "--out", str(tmp_path)], capsys)
        assert code == 0
        assert read_manifest(tmp_path)["scenario_kind"] == "pipe"


class TestRunLofa:
    def test_full_run_writes_both_phases(self, lofa_run):
        code, _, out = lofa_run
        assert code == 0
        assert sorted(os.listdir(out)) == FULL_RUN_FILES
        assert first_line(out / "transient_probe_ch0_fluid_0.5.csv") == \
            PROBE_HEADER
        assert first_line(out / "steady_probe_ch1_fuel_0.5.csv") == \
            PROBE_HEADER
        assert first_line(out / "transient_system.csv") == \
            "time,pressure,power_fraction,mdot_ch0,mdot_ch1"

    def test_manifest_records_the_audits(self, lofa_run):
        _, _, out = lofa_run
        manifest = read_manifest(out)
        assert set(manifest) == {"command", "scenario_kind",
                                 "artifact_version", "config_hash",
                                 "started", "finished", "outputs", "audits"}
        assert manifest["command"] == "run-lofa"
        assert manifest["outputs"] == [n for n in FULL_RUN_FILES
                                       if n != "manifest.json"]
        audits = manifest["audits"]
        assert audits["case_id"] == 1
        assert audits["seed_check"] is True
        assert audits["sealed"]["max_mass_drift"] < 1.0e-9
        assert audits["steady_converged_time"] <= 600.0
        assert audits["peak_fuel_temperature"] > 800.0
        assert len(audits["final_mass_flows"]) == 2
        assert audits["final_pressure"] > 0.0

    def test_other_case_replays_the_checkpoint(self, lofa_run, tmp_path,
                                               capsys):
        _, cfg, out = lofa_run
        ck = out / "steady_checkpoint.json"
        code, stdout, _ = run_cli(
            ["run-lofa", "--config", str(cfg), "--case", "2",
             "--from-checkpoint", str(ck), "--out", str(tmp_path)], capsys)
        assert code == 0 and "case 2" in stdout
        # sealed phase only: no steady files, no new checkpoint
        assert sorted(os.listdir(tmp_path)) == [
            "line_mid_t20.csv", "manifest.json",
            "transient_probe_ch0_fluid_0.5.csv",
            "transient_probe_ch1_fuel_0.5.csv", "transient_system.csv"]
        manifest = read_manifest(tmp_path)
        assert manifest["audits"]["case_id"] == 2
        assert "steady" not in manifest["audits"]
        # decay-law power is the weaker source, so the field ends cooler
        assert (manifest["audits"]["peak_fuel_temperature"]
                < read_manifest(out)["audits"]["peak_fuel_temperature"])

    def test_checkpoint_refuses_a_changed_network(self, lofa_run, tmp_path,
                                                  capsys):
        _, _, out = lofa_run
        altered = dict(SMALL_LOFA)
        altered["boundary"] = {"total_mdot": 10.0}
        cfg = tmp_path / "altered.json"
        cfg.write_text(json.dumps(altered), encoding="utf-8")
        code, _, err = run_cli(
            ["run-lofa", "--config", str(cfg),
             "--from-checkpoint", str(out / "steady_checkpoint.json"),
             "--out", str(tmp_path / "o")], capsys)
        assert code == 1
        assert "different configuration" in stderr_payload(err)["message"]


class TestErrorPaths:
    def test_missing_config_file(self, tmp_path, capsys):
        code, _, err = run_cli(
            ["run-pipe", "--config", str(tmp_path / "nope.json"),
             "--out", str(tmp_path)], capsys)
        assert code == 4
        assert stderr_payload(err)["error"] == "io"

    def test_json_syntax_error_names_the_line(self, tmp_path, capsys):
        cfg = tmp_path / "broken.json"
        cfg.write_text('{"kind": "pipe",\n  "divisions" 3}',
                       encoding="utf-8")
        code, _, err = run_cli(
            ["run-pipe", "--config", str(cfg), "--out", str(tmp_path)],
            capsys)
        assert code == 2
        payload = stderr_payload(err)
        assert payload["error"] == "config"
        assert "line 2" in payload["message"]
        assert str(cfg) in payload["message"]

    def test_unknown_key_names_the_key(self, tmp_path, capsys):
        cfg = tmp_path / "odd.json"
        cfg.write_text(json.dumps({"kind": "lofa", "rowz": 1}),
                       encoding="utf-8")
        code, _, err = run_cli(
            ["run-lofa", "--config", str(cfg), "--out", str(tmp_path)],
            capsys)
        assert code == 2
        assert "'rowz'" in stderr_payload(err)["message"]

    def test_property_range_failure_exits_three(self, tmp_path, capsys):
        # a hundredfold power density drives the fuel past the validity
        # ceiling of its cp polynomial within the first forced seconds;
        # that is a runtime range trip, not a config check
        hot = dict(SMALL_LOFA)
        hot["snapshot_times"] = []
        hot["network"] = dict(SMALL_LOFA["network"],
                               nominal_power_density=3.11e9)
        cfg = tmp_path / "hot.json"
        cfg.write_text(json.dumps(hot), encoding="utf-8")
        code, _, err = run_cli(
            ["run-lofa", "--config", str(cfg), "--out", str(tmp_path)],
            capsys)
        assert code == 3
        payload = stderr_payload(err)
        assert payload["error"] == "properties"
        assert "outside validity range" in payload["message"]

    def test_out_path_collides_with_a_directory(self, tmp_path, capsys):
        code, _, err = run_cli(["props", "--out", str(tmp_path)], capsys)
        assert code == 4
        assert stderr_payload(err)["error"] == "io"


class TestTopLevel:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.strip() == f"gascore {__version__}"

    def test_subcommand_is_required(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main([])
        assert exc.value.code == 2

    def test_verify_runs_every_audit(self, capsys):
        code, stdout, err = run_cli(["verify"], capsys)
        assert code == 0 and err == ""
        lines = [ln for ln in stdout.splitlines() if ln]
        assert len(lines) == 5
        names = []
        for ln in lines:
            m = re.match(r"^audit ([a-z-]+): ok \(.+\)$", ln)
            assert m, ln
            names.append(m.group(1))
        assert names == ["friction", "ratio-tables", "decay-law",
                         "sealed-network", "determinism"]
