"""Command-line front end.

One subcommand per bundled case family plus table generation, property
table export and a self-contained verification suite.  Every run
command writes its CSV set and exactly one ``manifest.json`` into the
output directory; repeated runs produce byte-identical CSVs, with only
the manifest's wall-clock stamps differing.

Errors leave on distinct exit codes with one JSON object on stderr:
2 for configuration problems (the message names the offending key or
the line in the file), 3 for solver or property-range failures, 4 for
file-system trouble, 1 for audit failures and anything unexpected.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import filecmp
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .buoyancy import DEFAULT_C, build_lookup_table, write_ratio_table
from .correlations import colebrook_residual, steady_friction
from .properties import (PropertyRangeError, build_helium_table,
                         write_property_table)
from .scenarios import (ScenarioError, build_buoyancy_case, build_lofa_case,
                        build_pipe_case, build_ramp_case,
                        default_lofa_network, ramp_table_rows,
                        record_outputs, run_buoyancy_case, run_lofa_case,
                        run_lofa_from_checkpoint, run_pipe_case,
                        run_ramp_case, scenario_digest,
                        scenarios_from_config, write_conditions_csv,
                        write_pipe_csv, write_ramp_csv)
from .solver import (DecayHeatSchedule, NetworkState, SolverError,
                     decay_power_fraction)

__all__ = ["main"]

_EXIT_INTERNAL = 1
_EXIT_CONFIG = 2
_EXIT_PHYSICS = 3
_EXIT_IO = 4


class AuditFailure(Exception):
    """A determinism or verification audit did not hold."""


def _now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _fail(category, code, message):
    json.dump({"error": category, "message": message}, sys.stderr)
    sys.stderr.write("\n")
    return code


def _load_config(path):
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno} column {exc.colno}: "
                            f"{exc.msg}") from exc


def _scenarios_for(args, kind, command, default):
    if getattr(args, "config", None):
        scns = scenarios_from_config(_load_config(args.config),
                                     path=args.config)
        wrong = [s.kind for s in scns if s.kind != kind]
        if wrong:
            raise ScenarioError(f"{args.config}: kind {wrong[0]!r} does not "
                                f"fit {command}")
        return scns
    return default()


def _write_manifest(out_dir, command, kind, config_hash, started, outputs,
                    audits):
    payload = {
        "command": command,
        "scenario_kind": kind,
        "artifact_version": __version__,
        "config_hash": config_hash,
        "started": started,
        "finished": _now(),
        "outputs": sorted(os.path.basename(p) for p in outputs),
        "audits": audits,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _repeat_check(writer, out_dir, names):
    """Rerun the writer into a scratch directory and demand equality."""
    with tempfile.TemporaryDirectory() as tmp:
        writer(tmp)
        bad = [n for n in names
               if not filecmp.cmp(os.path.join(out_dir, n),
                                  os.path.join(tmp, n), shallow=False)]
    if bad:
        raise AuditFailure("repeat produced different bytes for "
                           + ", ".join(sorted(bad)))


# ---------------------------------------------------------------------------
# run commands


def _cmd_run_ramp(args):
    scns = _scenarios_for(
        args, "ramp", "run-ramp",
        lambda: tuple(build_ramp_case(r) for r in ramp_table_rows("both")))
    started = _now()
    os.makedirs(args.out, exist_ok=True)

    def emit(target):
        paths = []
        for scn in scns:
            res = run_ramp_case(scn)
            path = os.path.join(target, f"ramp_{scn.ramp.label}.csv")
            write_ramp_csv(res, path)
            paths.append(path)
        return paths

    outputs = emit(args.out)
    names = [os.path.basename(p) for p in outputs]
    if args.seed_check:
        _repeat_check(emit, args.out, names)
    audits = {"rows": len(scns), "seed_check": bool(args.seed_check)}
    _write_manifest(args.out, "run-ramp", "ramp",
                    [scenario_digest(s) for s in scns], started, outputs,
                    audits)
    print(f"run-ramp: {len(scns)} rows -> {args.out}")
    return 0


def _cmd_run_pipe(args):
    scns = _scenarios_for(args, "pipe", "run-pipe",
                          lambda: (build_pipe_case(),))
    scn = scns[0]
    started = _now()
    os.makedirs(args.out, exist_ok=True)

    def emit(target):
        res = run_pipe_case(scn)
        pu = os.path.join(target, "pipe_uncorrected.csv")
        pc = os.path.join(target, "pipe_corrected.csv")
        write_pipe_csv(res.uncorrected, pu)
        write_pipe_csv(res.corrected, pc)
        return res, [pu, pc]

    res, outputs = emit(args.out)
    if args.seed_check:
        _repeat_check(lambda d: emit(d), args.out,
                      [os.path.basename(p) for p in outputs])
    audits = {
        "mass_flow": res.uncorrected.mass_flow,
        "dp_total_uncorrected": res.uncorrected.dp_total,
        "dp_total_corrected": res.corrected.dp_total,
        "wall_iterations": max(res.uncorrected.wall_iterations,
                               res.corrected.wall_iterations),
        "outlet_t_bulk": float(res.uncorrected.t_bulk[-1]),
        "seed_check": bool(args.seed_check),
    }
    _write_manifest(args.out, "run-pipe", "pipe", scenario_digest(scn),
                    started, outputs, audits)
    print(f"run-pipe: dp corrected {res.corrected.dp_total:.1f} Pa vs "
          f"uncorrected {res.uncorrected.dp_total:.1f} Pa -> {args.out}")
    return 0


def _case_schedule(case_id):
    if case_id == 1:
        return DecayHeatSchedule(mode="constant", constant_fraction=0.10)
    return DecayHeatSchedule(mode="decay_law")


def _with_case(spec, case_id):
    """Swap the sealed-phase case, replacing the schedule with that
    case's default."""
    if case_id is None or case_id == spec.lofa.case_id:
        return spec
    lofa = dataclasses.replace(spec.lofa, case_id=case_id,
                               schedule=_case_schedule(case_id))
    return dataclasses.replace(spec, lofa=lofa)


def _cmd_run_lofa(args):
    scns = _scenarios_for(
        args, "lofa", "run-lofa",
        lambda: (build_lofa_case(args.case if args.case else 1),))
    scn = _with_case(scns[0], args.case)
    started = _now()
    os.makedirs(args.out, exist_ok=True)
    if args.from_checkpoint:
        res = run_lofa_from_checkpoint(scn, args.from_checkpoint)
    else:
        ck = os.path.join(args.out, "steady_checkpoint.json")
        res = run_lofa_case(scn, checkpoint_path=ck)
    outputs = record_outputs(res, args.out)
    if res.checkpoint_path and not args.from_checkpoint:
        outputs.append(res.checkpoint_path)
    if args.seed_check:
        # replay the sealed phase from the checkpoint; phase-A files are
        # not regenerated, so compare the sealed-phase set only
        names = [os.path.basename(p) for p in outputs
                 if os.path.basename(p).startswith(("transient_", "line_"))]

        def replay(target):
            rerun = run_lofa_from_checkpoint(scn, res.checkpoint_path)
            record_outputs(rerun, target)

        _repeat_check(replay, args.out, names)
    audits = {
        "case_id": scn.lofa.case_id,
        "sealed": dataclasses.asdict(res.audit),
        "peak_fuel_temperature": res.peak_fuel_temperature,
        "final_pressure": float(res.state.pressure),
        "final_mass_flows": [float(m) for m in res.final_mass_flows],
        "seed_check": bool(args.seed_check),
    }
    if res.steady is not None:
        audits["steady"] = dataclasses.asdict(res.steady_audit)
        audits["steady_converged_time"] = res.steady.converged_time
    _write_manifest(args.out, "run-lofa", "lofa", scenario_digest(scn),
                    started, outputs, audits)
    print(f"run-lofa case {scn.lofa.case_id}: peak fuel "
          f"{res.peak_fuel_temperature:.1f} K -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# generators


def _cmd_gen_table(args):
    parent = os.path.dirname(args.out)
    if parent:
        os.makedirs(parent, exist_ok=True)
    if args.kind == "ratio":
        table = build_lookup_table(args.orientation, args.c)
        write_ratio_table(table, args.out)
        print(f"gen-table: {args.orientation} ratio table, C={args.c:g}, "
              f"{table.bo_grid.size} entries -> {args.out}")
        return 0
    scns = _scenarios_for(args, "buoyancy_point", "gen-table conditions",
                          lambda: (build_buoyancy_case(),))
    rows = run_buoyancy_case(scns[0])
    write_conditions_csv(rows, args.out)
    print(f"gen-table: {len(rows)} scaled flow conditions -> {args.out}")
    return 0


def _cmd_props(args):
    if args.spacing <= 0.0:
        raise ScenarioError("--spacing must be positive")
    if args.t_max <= args.t_min:
        raise ScenarioError("--t-max must exceed --t-min")
    table = build_helium_table(pressure=args.pressure, t_min=args.t_min,
                               t_max=args.t_max, spacing=args.spacing)
    parent = os.path.dirname(args.out)
    if parent:
        os.makedirs(parent, exist_ok=True)
    write_property_table(table, args.out)
    print(f"props: {table.temperatures.size} samples at "
          f"{args.pressure / 1.0e6:g} MPa -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# verification suite


def _cmd_verify(args):
    failures = []

    def report(name, ok, detail):
        print(f"audit {name}: {'ok' if ok else 'FAIL'} ({detail})")
        if not ok:
            failures.append(name)

    # friction closure solves its own equation
    re = np.logspace(math.log10(4.0e3), 8.0, 120)
    resid = np.max(np.abs(colebrook_residual(re, steady_friction(re))))
    lam_err = abs(steady_friction(500.0) - 64.0 / 500.0)
    report("friction", resid < 1.0e-10 and lam_err == 0.0,
           f"max residual {resid:.2e} over {re.size} points")

    # every ratio-table entry satisfies its defining equation
    worst = 0.0
    entries = 0
    p_exp = 1.0 / 0.46
    for orientation, sign in (("aided", 1.0), ("opposed", -1.0)):
        for c in (1.25e5, 2.5e5):
            tab = build_lookup_table(orientation, c)
            a = c * tab.bo_grid
            r = np.abs(tab.ratios ** p_exp + sign * a / tab.ratios ** 2
                       - 1.0)
            worst = max(worst, float(np.max(r)))
            entries += tab.bo_grid.size
    report("ratio-tables", worst < 1.0e-10,
           f"max residual {worst:.2e} over {entries} entries")

    # decay law: clamped at shutdown, then strictly decreasing
    sched = DecayHeatSchedule(mode="decay_law")
    t = np.logspace(0.0, 5.0, 200)
    f = np.array([decay_power_fraction(sched, ti) for ti in t])
    ok = (decay_power_fraction(sched, 0.0) == sched.clamp_fraction
          and bool(np.all(np.diff(f) < 0.0)) and f[-1] > 0.0)
    report("decay-law", ok, f"f(1 s) {f[0]:.4f} -> f(1e5 s) {f[-1]:.4f}")

    # short sealed network run keeps its books
    net = default_lofa_network(axial_nodes=9)
    table = build_helium_table()
    state = NetworkState(net, table, aided_table=build_lookup_table("aided"),
                         opposed_table=build_lookup_table("opposed"),
                         mode="sealed", schedule=_case_schedule(1))
    for _ in range(200):
        state.step()
    a = state.audit
    _, e_rel = state.energy_residual()
    ok = (a.max_mass_drift < 1.0e-9 and e_rel < 5.0e-3
          and a.max_courant <= net.control.cfl_target + 1.0e-12
          and a.wall_iterations_peak <= net.control.max_wall_iterations)
    report("sealed-network", ok,
           f"mass drift {a.max_mass_drift:.2e}, energy rel {e_rel:.2e}, "
           f"courant {a.max_courant:.3f}")

    # bit-for-bit determinism over a repeated short run
    def short_run():
        st = NetworkState(net, build_helium_table(),
                          aided_table=build_lookup_table("aided"),
                          opposed_table=build_lookup_table("opposed"),
                          mode="sealed", schedule=_case_schedule(2))
        for _ in range(60):
            st.step()
        return st

    s1, s2 = short_run(), short_run()
    same = (np.array_equal(s1.t_fluid, s2.t_fluid)
            and np.array_equal(s1.mdot, s2.mdot)
            and np.array_equal(s1.t_fuel, s2.t_fuel)
            and s1.pressure == s2.pressure)
    report("determinism", same, "60-step repeat bitwise "
           + ("equal" if same else "UNEQUAL"))

    if failures:
        return _fail("audit", _EXIT_INTERNAL,
                     "failed audits: " + ", ".join(failures))
    return 0


# ---------------------------------------------------------------------------
# parser


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gascore",
        description="transient thermal-hydraulics for gas-cooled channel "
                    "networks")
    parser.add_argument("--version", action="version",
                        version=f"gascore {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run(name, helptext):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="JSON scenario configuration")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed-check", action="store_true",
                       help="rerun and demand byte-identical CSVs")
        return p

    p = add_run("run-ramp", "velocity-ramp friction traces")
    p.set_defaults(func=_cmd_run_ramp)

    p = add_run("run-pipe", "heated duct sweep, with and without wall "
                            "corrections")
    p.set_defaults(func=_cmd_run_pipe)

    p = add_run("run-lofa", "two-phase network case")
    p.add_argument("--case", type=int, choices=(1, 2),
                   help="sealed-phase power schedule")
    p.add_argument("--from-checkpoint",
                   help="replay the sealed phase from a steady checkpoint")
    p.set_defaults(func=_cmd_run_lofa)

    p = sub.add_parser("gen-table", help="write a lookup or condition "
                                         "table")
    p.add_argument("kind", choices=("ratio", "conditions"))
    p.add_argument("--orientation", choices=("aided", "opposed"),
                   default="aided")
    p.add_argument("--c", type=float, default=DEFAULT_C,
                   help="calibration constant for ratio tables")
    p.add_argument("--config", help="JSON configuration (conditions only)")
    p.add_argument("--out", required=True, help="output file")
    p.set_defaults(func=_cmd_gen_table)

    p = sub.add_parser("props", help="write a fluid property table")
    p.add_argument("--pressure", type=float, default=7.0e6)
    p.add_argument("--t-min", type=float, default=500.0)
    p.add_argument("--t-max", type=float, default=1500.0)
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--out", required=True, help="output file")
    p.set_defaults(func=_cmd_props)

    p = sub.add_parser("verify", help="run the built-in audit suite")
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        return _fail("config", _EXIT_CONFIG, str(exc))
    except PropertyRangeError as exc:
        return _fail("properties", _EXIT_PHYSICS, str(exc))
    except SolverError as exc:
        return _fail("solver", _EXIT_PHYSICS, str(exc))
    except AuditFailure as exc:
        return _fail("audit", _EXIT_INTERNAL, str(exc))
    except OSError as exc:
        return _fail("io", _EXIT_IO, str(exc))
    except Exception as exc:
        return _fail("internal", _EXIT_INTERNAL,
                     f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
