"""Case builders and runners for the bundled study set.

Four case kinds share one declarative ScenarioSpec wrapper:

``ramp``            imposed linear velocity ramp in a single duct, with
                    the quasi-steady and the unsteady friction closure
                    evaluated side by side on the same trajectory.
``pipe``            steadily heated duct, axial marching sweep, run once
                    with wall-property corrections and once without.
``buoyancy_point``  tabulated flow conditions scaled from an anchor
                    condition through the buoyancy-parameter definition.
``lofa``            two-phase network protocol: forced cooldown to a
                    converged steady state, checkpoint and seal, then
                    decay-heat natural circulation to the requested time.

Builders are pure and cheap; runners own their simulation state, so
distinct cases can run concurrently.  Output files are plain CSV with a
header row and 17-significant-digit floats: one file per probe, per line
snapshot, or per ramp row, plus a per-phase system trace.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .buoyancy import (DEFAULT_C, build_lookup_table, buoyancy_parameter,
                       lookup)
from .correlations import (ALTERNATIVE_EXPONENTS, CorrelationConfig,
                           brunone_k3, petukhov_cf0, steady_friction)
from .properties import (FluidPropertyTable, SolidMaterialModel,
                         build_helium_table)
from .solver import (ChannelGeometry, DecayHeatSchedule, NetworkConfig,
                     NetworkState, OpenBoundary, StepControl, _wall_loop,
                     load_checkpoint, save_checkpoint)

__all__ = [
    "ScenarioError",
    "ProbeSpec",
    "LineSpec",
    "resolve_probes",
    "resolve_lines",
    "RampSpec",
    "ramp_table_rows",
    "build_ramp_case",
    "run_ramp_case",
    "RampResult",
    "PipeSpec",
    "build_pipe_case",
    "run_pipe_case",
    "PipeProfile",
    "PipeCaseResult",
    "FlowCondition",
    "TABLE_FLOW_CONDITIONS",
    "BuoyancyConditions",
    "ScaledCondition",
    "build_buoyancy_case",
    "run_buoyancy_case",
    "FUEL_COMPACT",
    "GRAPHITE_WEB",
    "default_lofa_network",
    "adiabatic_network",
    "LofaSpec",
    "build_lofa_case",
    "run_lofa_case",
    "run_lofa_from_checkpoint",
    "run_sealed_audit",
    "ScenarioSpec",
    "ProbeSeries",
    "LineSnapshot",
    "SteadyLog",
    "AuditSummary",
    "LofaResult",
    "record_outputs",
    "write_ramp_csv",
    "write_pipe_csv",
    "write_conditions_csv",
    "scenario_digest",
    "lofa_state_digest",
    "scenarios_from_config",
]


class ScenarioError(ValueError):
    """A scenario definition or configuration is invalid."""


# ---------------------------------------------------------------------------
# probes and lines


@dataclass(frozen=True)
class ProbeSpec:
    """One monitored location: a channel, an axial fraction, a medium.

    axial_fraction runs bottom to top over the full channel length for
    fluid probes and over the heated span for fuel probes.
    """

    channel: int
    axial_fraction: float
    medium: str
    label: str = ""

    def __post_init__(self):
        if self.medium not in ("fluid", "fuel"):
            raise ScenarioError(f"probe medium must be 'fluid' or 'fuel', "
                                f"got {self.medium!r}")
        if not 0.0 <= self.axial_fraction <= 1.0:
            raise ScenarioError(f"probe axial_fraction must lie in [0, 1], "
                                f"got {self.axial_fraction!r}")
        if self.channel < 0:
            raise ScenarioError(f"probe channel must be non-negative, got "
                                f"{self.channel!r}")
        if not self.label:
            object.__setattr__(
                self, "label",
                f"ch{self.channel}_{self.medium}_{self.axial_fraction:g}")


@dataclass(frozen=True)
class LineSpec:
    """A cross-network node sequence for snapshot output.

    points are (channel, axial_fraction) pairs; positions, when given,
    supply the plotting coordinate per point (node elevation otherwise).
    """

    name: str
    points: tuple
    positions: tuple | None = None

    def __post_init__(self):
        pts = tuple((int(c), float(f)) for c, f in self.points)
        if not pts:
            raise ScenarioError(f"line {self.name!r} has no points")
        for c, f in pts:
            if c < 0 or not 0.0 <= f <= 1.0:
                raise ScenarioError(f"line {self.name!r}: bad point "
                                    f"({c}, {f})")
        object.__setattr__(self, "points", pts)
        if self.positions is not None:
            pos = tuple(float(p) for p in self.positions)
            if len(pos) != len(pts):
                raise ScenarioError(f"line {self.name!r}: positions length "
                                    f"{len(pos)} != points {len(pts)}")
            object.__setattr__(self, "positions", pos)


@dataclass(frozen=True)
class ResolvedProbe:
    probe: ProbeSpec
    fluid_index: int
    heated_level: int | None


@dataclass(frozen=True)
class ResolvedLine:
    line: LineSpec
    channels: tuple
    fluid_indices: tuple
    positions: tuple


def resolve_probes(probes, config: NetworkConfig):
    """Map probe fractions onto grid indices, failing before any run."""
    geo = config.geometry
    heated = geo.heated_indices()
    out = []
    for p in probes:
        if p.channel >= config.n_channels:
            raise ScenarioError(
                f"probe {p.label!r}: channel {p.channel} does not exist "
                f"(network has {config.n_channels})")
        if p.medium == "fuel":
            lev = min(int(p.axial_fraction * heated.size), heated.size - 1)
            out.append(ResolvedProbe(p, int(heated[lev]), lev))
        else:
            idx = min(int(p.axial_fraction * geo.axial_nodes),
                      geo.axial_nodes - 1)
            out.append(ResolvedProbe(p, idx, None))
    return tuple(out)


def resolve_lines(lines, config: NetworkConfig):
    geo = config.geometry
    centers = geo.node_centers()
    out = []
    for line in lines:
        chans, idxs = [], []
        for c, f in line.points:
            if c >= config.n_channels:
                raise ScenarioError(
                    f"line {line.name!r}: channel {c} does not exist "
                    f"(network has {config.n_channels})")
            chans.append(c)
            idxs.append(min(int(f * geo.axial_nodes), geo.axial_nodes - 1))
        pos = (line.positions if line.positions is not None
               else tuple(float(centers[i]) for i in idxs))
        out.append(ResolvedLine(line, tuple(chans), tuple(idxs), pos))
    return tuple(out)


# ---------------------------------------------------------------------------
# ramp case


RAMP_REFERENCE_TEMPERATURES = (773.15, 1023.15, 1223.15)   # K
RAMP_DURATIONS = (1.0, 0.1, 0.01)                          # s
RAMP_LOW_SPEED = 10.0                                      # m/s
# high-end speed keyed to the reference temperature
RAMP_HIGH_SPEED = {773.15: 35.0, 1023.15: 45.0, 1223.15: 55.0}


@dataclass(frozen=True)
class RampSpec:
    """One linear velocity ramp in a duct of fixed bulk state."""

    reference_temperature: float   # K
    ramp_duration: float           # s
    u_start: float                 # m/s
    u_end: float                   # m/s
    direction: str = ""            # derived from the endpoint order
    diameter: float = 0.01588      # m
    pressure: float = 7.0e6        # Pa

    def __post_init__(self):
        if not self.u_start > 0.0 or not self.u_end > 0.0:
            raise ScenarioError(f"ramp speeds must be positive, got "
                                f"{self.u_start!r} -> {self.u_end!r}")
        if self.u_start == self.u_end:
            raise ScenarioError("ramp needs distinct endpoint speeds")
        if not self.ramp_duration > 0.0:
            raise ScenarioError("ramp_duration must be positive")
        if not self.reference_temperature > 0.0:
            raise ScenarioError("reference_temperature must be positive")
        if not self.diameter > 0.0 or not self.pressure > 0.0:
            raise ScenarioError("diameter and pressure must be positive")
        derived = "up" if self.u_end > self.u_start else "down"
        if not self.direction:
            object.__setattr__(self, "direction", derived)
        elif self.direction != derived:
            raise ScenarioError(
                f"direction {self.direction!r} contradicts the speeds "
                f"{self.u_start} -> {self.u_end}")

    @property
    def label(self):
        celsius = self.reference_temperature - 273.15
        return f"{self.direction}_{celsius:g}C_tau{self.ramp_duration:g}"


def ramp_table_rows(direction="both"):
    """The bundled ramp matrix: three temperatures, three durations,
    10 m/s against a temperature-keyed high speed, both directions."""
    if direction not in ("up", "down", "both"):
        raise ScenarioError(f"direction must be up, down or both, got "
                            f"{direction!r}")
    rows = []
    for want in ("up", "down"):
        if direction not in (want, "both"):
            continue
        for t_ref in RAMP_REFERENCE_TEMPERATURES:
            hi = RAMP_HIGH_SPEED[t_ref]
            for tau in RAMP_DURATIONS:
                if want == "up":
                    rows.append(RampSpec(t_ref, tau, RAMP_LOW_SPEED, hi))
                else:
                    rows.append(RampSpec(t_ref, tau, hi, RAMP_LOW_SPEED))
    return tuple(rows)


def build_ramp_case(spec: RampSpec, samples_per_phase=200):
    """Wrap a ramp row: the trace covers the ramp plus an equal hold."""
    if samples_per_phase < 2:
        raise ScenarioError("need at least two samples per phase")
    return ScenarioSpec(
        kind="ramp",
        duration=2.0 * spec.ramp_duration,
        output_cadence=spec.ramp_duration / samples_per_phase,
        ramp=spec)


@dataclass
class RampResult:
    """Sampled friction traces along one ramp trajectory."""

    spec: RampSpec
    time: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    reynolds: np.ndarray
    cf_quasi_steady: np.ndarray
    cf_brunone: np.ndarray


def run_ramp_case(scn, table: FluidPropertyTable | None = None,
                  cfg: CorrelationConfig = CorrelationConfig()):
    """Evaluate both friction closures on the prescribed trajectory.

    The velocity is imposed, not solved: U rises (or falls) linearly over
    the ramp and is then held, and the closures are evaluated pointwise
    at the fixed bulk state of the reference temperature.  During the
    hold the transient term is identically zero, so the two traces agree
    bit for bit there.
    """
    spec = scn.ramp
    if table is None:
        table = build_helium_table(pressure=spec.pressure)
    s = table.interpolate(spec.reference_temperature)
    n = round(scn.duration / scn.output_cadence)
    time = np.arange(n + 1) * scn.output_cadence
    in_ramp = time < spec.ramp_duration
    slope = (spec.u_end - spec.u_start) / spec.ramp_duration
    u = np.where(in_ramp, spec.u_start + slope * time, spec.u_end)
    accel = np.where(in_ramp, slope, 0.0)
    re = s.density * np.abs(u) * spec.diameter / s.viscosity
    cf_q = steady_friction(re, cfg)
    k3 = brunone_k3(re, cfg)
    transient = k3 * spec.diameter * accel / (u * np.abs(u))
    return RampResult(spec=spec, time=time, velocity=u, acceleration=accel,
                      reynolds=re, cf_quasi_steady=cf_q,
                      cf_brunone=cf_q + transient)


# ---------------------------------------------------------------------------
# heated pipe case


@dataclass(frozen=True)
class PipeSpec:
    """Steadily heated duct swept axially at fixed mass flow."""

    diameter: float = 0.01588          # m
    length: float = 7.93               # m
    heat_flux: float = 1.46e5          # W/m2, uniform
    inlet_velocity: float = 28.0       # m/s
    inlet_temperature: float = 763.15  # K
    outlet_pressure: float = 7.0e6     # Pa
    divisions: int = 1895
    exponents: tuple = ALTERNATIVE_EXPONENTS   # (m, n) wall correction

    def __post_init__(self):
        for name in ("diameter", "length", "heat_flux", "inlet_velocity",
                     "inlet_temperature", "outlet_pressure"):
            if not getattr(self, name) > 0.0:
                raise ScenarioError(f"{name} must be positive, got "
                                    f"{getattr(self, name)!r}")
        if self.divisions < 10:
            raise ScenarioError(f"divisions must be at least 10, got "
                                f"{self.divisions!r}")
        exps = tuple(float(e) for e in self.exponents)
        if len(exps) != 2:
            raise ScenarioError("exponents must be an (m, n) pair")
        object.__setattr__(self, "exponents", exps)

    @property
    def flow_area(self):
        return math.pi * self.diameter ** 2 / 4.0


def build_pipe_case(**overrides):
    """Steady sweep case; duration is zero because nothing is transient."""
    return ScenarioSpec(kind="pipe", duration=0.0, output_cadence=0.0,
                        pipe=PipeSpec(**overrides))


@dataclass
class PipeProfile:
    """One axial sweep of the heated duct."""

    corrected: bool
    position: np.ndarray
    t_bulk: np.ndarray
    t_wall: np.ndarray
    pressure: np.ndarray
    c_f: np.ndarray
    nu: np.ndarray
    wall_iterations: int
    dp_friction: float
    dp_acceleration: float
    dp_total: float
    mass_flow: float


@dataclass
class PipeCaseResult:
    spec: PipeSpec
    uncorrected: PipeProfile
    corrected: PipeProfile


def _pipe_sweep(spec: PipeSpec, table: FluidPropertyTable, corrected):
    """March the bulk state down the duct and close the wall per station.

    The bulk enthalpy profile follows from the imposed flux alone, so it
    is identical for both variants; only the friction factor and the
    film coefficient react to the wall-property correction.
    """
    ccfg = CorrelationConfig(density_exponent=spec.exponents[0],
                             viscosity_exponent=spec.exponents[1],
                             property_corrections=corrected)
    area = spec.flow_area
    perim = math.pi * spec.diameter
    s_in = table.interpolate(spec.inlet_temperature)
    mdot = s_in.density * spec.inlet_velocity * area
    dz = spec.length / spec.divisions
    z = (np.arange(spec.divisions) + 0.5) * dz
    h = s_in.enthalpy + spec.heat_flux * perim * z / mdot
    t_b = np.interp(h, table.enthalpy, table.temperatures)
    rho, mu, lam, cp, _ = table.interpolate_arrays(t_b)
    u = mdot / (rho * area)
    q = np.full_like(t_b, spec.heat_flux)
    t_w, _, nu, _, _, corr, iters = _wall_loop(
        t_b, rho, mu, lam, cp, u, table, ccfg, None, None, 0.0,
        spec.diameter, t_b.copy(), q_fixed=q)
    re = rho * u * spec.diameter / mu
    c_f = petukhov_cf0(re) * corr
    fric = c_f * dz / spec.diameter * rho * u * u / 2.0
    g_flux = mdot / area
    h_out = s_in.enthalpy + spec.heat_flux * perim * spec.length / mdot
    t_out = float(np.interp(h_out, table.enthalpy, table.temperatures))
    rho_out = table.interpolate(t_out).density
    dp_fric = float(np.sum(fric))
    dp_acc = g_flux ** 2 * (1.0 / rho_out - 1.0 / s_in.density)
    # pressure at station centres: half the local friction cell plus the
    # acceleration of the gas up to the local state
    cum = np.cumsum(fric) - fric / 2.0
    acc = g_flux ** 2 * (1.0 / rho - 1.0 / s_in.density)
    p = spec.outlet_pressure + dp_fric + dp_acc - cum - acc
    return PipeProfile(corrected=corrected, position=z, t_bulk=t_b,
                       t_wall=t_w, pressure=p, c_f=c_f, nu=nu,
                       wall_iterations=iters, dp_friction=dp_fric,
                       dp_acceleration=dp_acc,
                       dp_total=dp_fric + dp_acc, mass_flow=mdot)


def run_pipe_case(scn, table: FluidPropertyTable | None = None):
    spec = scn.pipe
    if table is None:
        table = build_helium_table(pressure=spec.outlet_pressure)
    return PipeCaseResult(spec=spec,
                          uncorrected=_pipe_sweep(spec, table, False),
                          corrected=_pipe_sweep(spec, table, True))


# ---------------------------------------------------------------------------
# buoyancy flow conditions


@dataclass(frozen=True)
class FlowCondition:
    """One tabulated operating point of the reduced-flow study."""

    velocity: float     # m/s
    heat_flux: float    # W/m2
    reynolds: float
    bo_star: float      # reference buoyancy parameter


TABLE_FLOW_CONDITIONS = (
    FlowCondition(2.89, 29.1e3, 5134.0, 0.26e-6),
    FlowCondition(2.89, 72.8e3, 5134.0, 0.65e-6),
    FlowCondition(2.89, 145.5e3, 5134.0, 1.30e-6),
    FlowCondition(2.89, 218.3e3, 5134.0, 1.95e-6),
    FlowCondition(2.32, 145.5e3, 4108.0, 2.79e-6),
    FlowCondition(1.74, 218.3e3, 3080.0, 11.20e-6),
)


@dataclass(frozen=True)
class BuoyancyConditions:
    """A set of flow conditions scaled from the first (anchor) entry."""

    conditions: tuple = TABLE_FLOW_CONDITIONS
    prandtl: float = 0.66
    c_constant: float = DEFAULT_C

    def __post_init__(self):
        conds = tuple(self.conditions)
        if not conds:
            raise ScenarioError("need at least the anchor condition")
        object.__setattr__(self, "conditions", conds)
        if not self.prandtl > 0.0 or not self.c_constant > 0.0:
            raise ScenarioError("prandtl and c_constant must be positive")


@dataclass(frozen=True)
class ScaledCondition:
    condition: FlowCondition
    bo_scaled: float
    aided_ratio: float
    opposed_ratio: float


def build_buoyancy_case(conditions=TABLE_FLOW_CONDITIONS, prandtl=0.66,
                        c_constant=DEFAULT_C):
    return ScenarioSpec(kind="buoyancy_point", duration=0.0,
                        output_cadence=0.0,
                        buoyancy=BuoyancyConditions(tuple(conditions),
                                                    prandtl, c_constant))


def run_buoyancy_case(scn):
    """Scale the anchor condition across the set and look up both ratios.

    The wall-flux Grashof number is linear in the heat flux, so anchoring
    it to reproduce the first condition's parameter and rescaling by
    flux and Reynolds number exercises the parameter definition without
    needing the fluid state behind the tabulated rows.
    """
    bc = scn.buoyancy
    anchor = bc.conditions[0]
    gr_anchor = (anchor.bo_star * anchor.reynolds ** 3.425
                 * bc.prandtl ** 0.8)
    aided = build_lookup_table("aided", bc.c_constant)
    opposed = build_lookup_table("opposed", bc.c_constant)
    rows = []
    for cond in bc.conditions:
        gr = gr_anchor * cond.heat_flux / anchor.heat_flux
        bo = buoyancy_parameter(gr, cond.reynolds, bc.prandtl)
        rows.append(ScaledCondition(cond, bo, lookup(aided, bo),
                                    lookup(opposed, bo)))
    return tuple(rows)


# ---------------------------------------------------------------------------
# network case: materials and default layout


FUEL_COMPACT = SolidMaterialModel(
    name="fuel_compact",
    conductivity_coeffs=(60.0, -0.03, 8.0e-6, 0.0, 0.0),
    specific_heat_coeffs=(250.0, 2.2, -9.0e-4, 1.3e-7, 0.0),
    density=1650.0)

GRAPHITE_WEB = SolidMaterialModel(
    name="graphite_web",
    conductivity_coeffs=(130.0, -0.05, 1.25e-5, 0.0, 0.0),
    specific_heat_coeffs=(200.0, 2.5, -1.05e-3, 1.5e-7, 0.0),
    density=1740.0)


def default_lofa_network(axial_nodes=27, control=None, correlations=None):
    """Seven-channel desk-scale network.

    Channel 0 faces the cooled periphery; channels 1 to 3 form a middle
    tier and 4 to 6 the inner (hottest) tier, with each middle channel
    bridging the periphery channel to one inner channel and the inner
    tier closed into a triangle.  Conductances are per metre of heated
    length; the web-to-web values are annular-shell estimates while the
    periphery value is kept deliberately weak so that decay heat is only
    partially rejected and the sealed transient stays heating-dominated.
    """
    lat = 200.0
    return NetworkConfig(
        geometry=ChannelGeometry(axial_nodes=axial_nodes),
        n_channels=7,
        power_factors=(0.85, 1.0, 1.0, 1.0, 1.1, 1.1, 1.1),
        nominal_power_density=3.11e7,
        fuel_area=1.05e-4,
        web_area=5.0e-4,
        fuel_material=FUEL_COMPACT,
        web_material=GRAPHITE_WEB,
        g_fuel_web=500.0,
        g_web_surface=600.0,
        lateral_links=((0, 1, lat), (0, 2, lat), (0, 3, lat),
                       (1, 4, lat), (2, 5, lat), (3, 6, lat),
                       (4, 5, lat), (5, 6, lat), (4, 6, lat)),
        periphery_links=((0, 2.0),),
        correlations=correlations or CorrelationConfig(),
        control=control or StepControl())


def adiabatic_network(network: NetworkConfig):
    """Same network with the periphery links removed (conservation runs)."""
    return dataclasses.replace(network, periphery_links=())


@dataclass(frozen=True)
class LofaSpec:
    """Two-phase protocol parameters around one NetworkConfig."""

    network: NetworkConfig
    case_id: int
    schedule: DecayHeatSchedule
    boundary: OpenBoundary
    steady_window: float = 10.0      # s of simulated time per check
    steady_tolerance: float = 1.0e-6
    steady_max_time: float = 3000.0  # s, give up beyond this

    def __post_init__(self):
        if self.case_id not in (1, 2):
            raise ScenarioError(f"case_id must be 1 or 2, got "
                                f"{self.case_id!r}")
        if not self.steady_window > 0.0 or not self.steady_tolerance > 0.0:
            raise ScenarioError("steady window and tolerance must be "
                                "positive")
        if not self.steady_max_time > self.steady_window:
            raise ScenarioError("steady_max_time must exceed the window")
        if self.boundary.mdot_total == 0.0:
            raise ScenarioError("the forced phase needs a nonzero flow")


DEFAULT_LOFA_PROBES = (
    ProbeSpec(0, 0.5, "fluid"),
    ProbeSpec(6, 0.5, "fluid"),
    ProbeSpec(0, 0.5, "fuel"),
    ProbeSpec(2, 0.5, "fuel"),
    ProbeSpec(6, 0.5, "fuel"),
)

DEFAULT_LOFA_LINES = (
    LineSpec("hot_axial", tuple((6, (i + 0.5) / 27.0) for i in range(27))),
    LineSpec("mid_cross", tuple((i, 0.5) for i in range(7)),
             positions=tuple(float(i) for i in range(7))),
)


def build_lofa_case(case_id=1, *, network=None, axial_nodes=27, control=None,
                    correlations=None, duration=1000.0, output_cadence=1.0,
                    probes=DEFAULT_LOFA_PROBES, lines=DEFAULT_LOFA_LINES,
                    snapshot_times=(503.0,), total_mdot=14.35,
                    full_core_channels=1020, inlet_temperature=763.15,
                    pressure=7.0e6, schedule=None, steady_window=10.0,
                    steady_tolerance=1.0e-6, steady_max_time=3000.0):
    """Assemble the two-phase case.

    The forced-phase inlet flow is the plant total scaled by the modeled
    share of the full-core channel count, entering at the top; case 1
    holds the post-trip power at a constant tenth of rated, case 2
    follows the decay law.
    """
    if network is None:
        network = default_lofa_network(axial_nodes=axial_nodes,
                                       control=control,
                                       correlations=correlations)
    if full_core_channels < network.n_channels:
        raise ScenarioError(
            f"full_core_channels {full_core_channels} is below the "
            f"modeled count {network.n_channels}")
    if schedule is None:
        if case_id == 1:
            schedule = DecayHeatSchedule(mode="constant",
                                         constant_fraction=0.10)
        else:
            schedule = DecayHeatSchedule(mode="decay_law")
    # inlet at the top, so the forced flow is downward (negative)
    mdot = -total_mdot * network.n_channels / full_core_channels
    boundary = OpenBoundary(mdot_total=mdot,
                            inlet_temperature=inlet_temperature,
                            pressure=pressure)
    lofa = LofaSpec(network=network, case_id=case_id, schedule=schedule,
                    boundary=boundary, steady_window=steady_window,
                    steady_tolerance=steady_tolerance,
                    steady_max_time=steady_max_time)
    spec = ScenarioSpec(kind="lofa", duration=duration,
                        output_cadence=output_cadence, probes=tuple(probes),
                        lines=tuple(lines),
                        snapshot_times=tuple(snapshot_times), lofa=lofa)
    # fail on dangling probe or line references before anything runs
    resolve_probes(spec.probes, network)
    resolve_lines(spec.lines, network)
    return spec


# ---------------------------------------------------------------------------
# the declarative wrapper


@dataclass(frozen=True)
class ScenarioSpec:
    """One case of any kind, carrying exactly its own payload."""

    kind: str
    duration: float
    output_cadence: float
    probes: tuple = ()
    lines: tuple = ()
    snapshot_times: tuple = ()
    ramp: RampSpec | None = None
    pipe: PipeSpec | None = None
    buoyancy: BuoyancyConditions | None = None
    lofa: LofaSpec | None = None

    def __post_init__(self):
        payloads = {"ramp": self.ramp, "pipe": self.pipe,
                    "buoyancy_point": self.buoyancy, "lofa": self.lofa}
        if self.kind not in payloads:
            raise ScenarioError(f"unknown scenario kind {self.kind!r}")
        present = [k for k, v in payloads.items() if v is not None]
        if present != [self.kind]:
            raise ScenarioError(f"kind {self.kind!r} must carry exactly "
                                f"its own payload, found {present}")
        if self.kind in ("ramp", "lofa"):
            if not self.duration > 0.0:
                raise ScenarioError("duration must be positive")
            if not self.output_cadence > 0.0:
                raise ScenarioError("output_cadence must be positive")
        elif self.duration < 0.0:
            raise ScenarioError("duration must be non-negative")
        object.__setattr__(self, "probes", tuple(self.probes))
        object.__setattr__(self, "lines", tuple(self.lines))
        snaps = tuple(float(t) for t in self.snapshot_times)
        object.__setattr__(self, "snapshot_times", snaps)
        if self.kind != "lofa" and (self.probes or self.lines or snaps):
            raise ScenarioError("probes, lines and snapshots apply to the "
                                "network case only")
        for t in snaps:
            if not 0.0 <= t <= self.duration:
                raise ScenarioError(f"snapshot time {t} outside the run "
                                    f"span [0, {self.duration}]")

    @property
    def geometry(self):
        """The governing channel geometry, where one exists."""
        if self.kind == "lofa":
            return self.lofa.network.geometry
        if self.kind == "pipe":
            p = self.pipe
            return ChannelGeometry(diameter=p.diameter,
                                   heated_length=p.length,
                                   lower_reflector_length=0.0,
                                   upper_reflector_length=0.0,
                                   axial_nodes=p.divisions)
        return None


# ---------------------------------------------------------------------------
# network case: recording and running


@dataclass
class ProbeSeries:
    probe: ProbeSpec
    times: np.ndarray
    temperature: np.ndarray
    velocity: np.ndarray
    mass_flow: np.ndarray


@dataclass
class LineSnapshot:
    line: LineSpec
    requested_time: float
    actual_time: float
    positions: np.ndarray
    temperature: np.ndarray
    velocity: np.ndarray


@dataclass
class SteadyLog:
    times: np.ndarray
    max_relative_change: np.ndarray
    converged_time: float
    steps: int


@dataclass
class AuditSummary:
    """Scalars worth keeping from one simulation phase."""

    max_mass_drift: float
    max_split_ratio: float
    max_courant: float
    wall_iterations_peak: int
    energy_residual: float
    energy_residual_relative: float
    clamp_events: int
    saturation_events: int


def _audit_summary(state: NetworkState):
    resid, rel = state.energy_residual()
    a = state.audit
    clamp = state.table.clamp_events
    sat = 0
    for tab in (state.aided, state.opposed):
        if tab is not None:
            clamp += tab.clamp_events
            sat += tab.saturation_events
    return AuditSummary(max_mass_drift=a.max_mass_drift,
                        max_split_ratio=a.max_split_ratio,
                        max_courant=a.max_courant,
                        wall_iterations_peak=a.wall_iterations_peak,
                        energy_residual=resid,
                        energy_residual_relative=rel,
                        clamp_events=clamp, saturation_events=sat)


class _Recorder:
    """Cadenced probe and system sampling over one simulation phase."""

    def __init__(self, state: NetworkState, resolved, cadence):
        self.state = state
        self.resolved = resolved
        self.cadence = cadence
        self.next_time = None
        self.times = []
        self.temps = [[] for _ in resolved]
        self.vels = [[] for _ in resolved]
        self.flows = [[] for _ in resolved]
        self.pressures = []
        self.fractions = []
        self.channel_flows = []

    def sample_now(self):
        st = self.state
        rho = st.fluid_props()[0]
        area = st.cfg.geometry.flow_area
        self.times.append(st.time)
        for j, rp in enumerate(self.resolved):
            ch = rp.probe.channel
            if rp.probe.medium == "fuel":
                t = st.t_fuel[ch, rp.heated_level]
            else:
                t = st.t_fluid[ch, rp.fluid_index]
            u = st.mdot[ch] / (rho[ch, rp.fluid_index] * area)
            self.temps[j].append(float(t))
            self.vels[j].append(float(u))
            self.flows[j].append(float(st.mdot[ch]))
        self.pressures.append(float(st.pressure))
        self.fractions.append(float(st._power_fraction()))
        self.channel_flows.append(st.mdot.copy())
        if self.next_time is None:
            self.next_time = st.time
        self.next_time += self.cadence

    def sample_due(self):
        # sample_now advances next_time, keeping the absolute schedule
        while self.next_time is not None \
                and self.state.time >= self.next_time - 1.0e-9:
            self.sample_now()

    def last_temperatures(self):
        return np.array([col[-1] for col in self.temps])

    def series(self, origin=0.0):
        times = np.asarray(self.times) - origin
        return tuple(ProbeSeries(probe=rp.probe, times=times.copy(),
                                 temperature=np.asarray(self.temps[j]),
                                 velocity=np.asarray(self.vels[j]),
                                 mass_flow=np.asarray(self.flows[j]))
                     for j, rp in enumerate(self.resolved))

    def system_columns(self, origin=0.0):
        """(times, pressure, power_fraction, per-channel flow matrix)."""
        times = np.asarray(self.times) - origin
        return (times, np.asarray(self.pressures),
                np.asarray(self.fractions),
                np.asarray(self.channel_flows))


def _take_snapshots(state: NetworkState, r_lines, requested, origin):
    rho = state.fluid_props()[0]
    area = state.cfg.geometry.flow_area
    out = []
    for rl in r_lines:
        ch = np.asarray(rl.channels)
        idx = np.asarray(rl.fluid_indices)
        temp = state.t_fluid[ch, idx]
        vel = state.mdot[ch] / (rho[ch, idx] * area)
        out.append(LineSnapshot(line=rl.line, requested_time=requested,
                                actual_time=state.time - origin,
                                positions=np.asarray(rl.positions),
                                temperature=temp.copy(), velocity=vel))
    return out


def _run_steady(state: NetworkState, spec: ScenarioSpec, resolved):
    """Force flow until every probe temperature has stopped moving.

    Convergence compares each probe against its value one window earlier;
    the criterion is the worst relative change across probes.
    """
    lofa = spec.lofa
    rec = _Recorder(state, resolved, spec.output_cadence)
    rec.sample_now()
    history = [(state.time, rec.last_temperatures())]
    log_t, log_r = [], []
    converged = False
    while not converged:
        if state.time > lofa.steady_max_time:
            last = log_r[-1] if log_r else math.nan
            raise ScenarioError(
                f"steady phase still moving after {state.time:.1f} s "
                f"(last residual {last:.3e}, tolerance "
                f"{lofa.steady_tolerance:.1e})")
        state.step()
        before = len(rec.times)
        rec.sample_due()
        if len(rec.times) == before:
            continue
        now = state.time
        vals = rec.last_temperatures()
        history.append((now, vals))
        while len(history) > 2 and history[1][0] <= now - lofa.steady_window:
            history.pop(0)
        base_t, base_v = history[0]
        if base_t <= now - lofa.steady_window:
            rel = float(np.max(np.abs(vals - base_v)
                               / np.maximum(np.abs(base_v), 1.0e-30)))
            log_t.append(now)
            log_r.append(rel)
            converged = rel < lofa.steady_tolerance
    return rec, SteadyLog(times=np.asarray(log_t),
                          max_relative_change=np.asarray(log_r),
                          converged_time=state.time,
                          steps=state.step_count)


def _run_transient(state: NetworkState, spec: ScenarioSpec, resolved,
                   r_lines):
    origin = state.time_sealed
    rec = _Recorder(state, resolved, spec.output_cadence)
    rec.sample_now()
    pending = sorted(spec.snapshot_times)
    snaps = []
    end = origin + spec.duration
    while state.time < end - 1.0e-9:
        state.step()
        rec.sample_due()
        while pending and state.time - origin >= pending[0] - 1.0e-9:
            snaps.extend(_take_snapshots(state, r_lines, pending.pop(0),
                                         origin))
    return rec, tuple(snaps)


@dataclass
class LofaResult:
    """Everything one two-phase run produced, state included."""

    spec: ScenarioSpec
    steady: SteadyLog | None
    steady_series: tuple
    steady_system: tuple | None
    series: tuple
    system: tuple
    lines: tuple
    checkpoint_path: str | None
    state: NetworkState
    steady_audit: AuditSummary | None
    audit: AuditSummary
    peak_fuel_temperature: float
    final_mass_flows: np.ndarray


def _network_tables(lofa: LofaSpec):
    table = build_helium_table(pressure=lofa.boundary.pressure)
    return table, build_lookup_table("aided"), build_lookup_table("opposed")


def run_lofa_case(spec: ScenarioSpec, out_dir=None, checkpoint_path=None):
    """Run both phases: forced cooldown, seal, decay-heat circulation.

    The checkpoint is written right after sealing, so a phase-B-only
    rerun (any case) can resume from it; the audit trail restarts at the
    seal and therefore covers exactly the sealed phase.
    """
    lofa = spec.lofa
    table, aided, opposed = _network_tables(lofa)
    state = NetworkState(lofa.network, table, aided_table=aided,
                         opposed_table=opposed, mode="open",
                         boundary=lofa.boundary,
                         initial_temperature=lofa.boundary.inlet_temperature)
    resolved = resolve_probes(spec.probes, lofa.network)
    r_lines = resolve_lines(spec.lines, lofa.network)
    steady_rec, steady_log = _run_steady(state, spec, resolved)
    steady_audit = _audit_summary(state)
    state.seal_boundaries()
    state.schedule = lofa.schedule
    if checkpoint_path is None and out_dir is not None:
        checkpoint_path = os.path.join(out_dir, "steady_checkpoint.json")
    if checkpoint_path is not None:
        parent = os.path.dirname(checkpoint_path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        save_checkpoint(state, checkpoint_path,
                        config_digest=lofa_state_digest(spec))
    rec, snaps = _run_transient(state, spec, resolved, r_lines)
    result = LofaResult(
        spec=spec, steady=steady_log, steady_series=steady_rec.series(),
        steady_system=steady_rec.system_columns(), series=rec.series(
            origin=state.time_sealed),
        system=rec.system_columns(origin=state.time_sealed), lines=snaps,
        checkpoint_path=checkpoint_path, state=state,
        steady_audit=steady_audit, audit=_audit_summary(state),
        peak_fuel_temperature=float(np.max(state.t_fuel)),
        final_mass_flows=state.mdot.copy())
    if out_dir is not None:
        record_outputs(result, out_dir)
    return result


def run_lofa_from_checkpoint(spec: ScenarioSpec, checkpoint_path,
                             out_dir=None):
    """Rerun the sealed phase from a stored steady checkpoint."""
    lofa = spec.lofa
    table, aided, opposed = _network_tables(lofa)
    state = NetworkState(lofa.network, table, aided_table=aided,
                         opposed_table=opposed, mode="sealed",
                         pressure=lofa.boundary.pressure,
                         initial_temperature=lofa.boundary.inlet_temperature,
                         schedule=lofa.schedule)
    load_checkpoint(state, checkpoint_path,
                    config_digest=lofa_state_digest(spec))
    if state.mode != "sealed":
        raise ScenarioError("checkpoint is not a sealed-phase snapshot")
    resolved = resolve_probes(spec.probes, lofa.network)
    r_lines = resolve_lines(spec.lines, lofa.network)
    rec, snaps = _run_transient(state, spec, resolved, r_lines)
    result = LofaResult(
        spec=spec, steady=None, steady_series=(), steady_system=None,
        series=rec.series(origin=state.time_sealed),
        system=rec.system_columns(origin=state.time_sealed), lines=snaps,
        checkpoint_path=checkpoint_path, state=state, steady_audit=None,
        audit=_audit_summary(state),
        peak_fuel_temperature=float(np.max(state.t_fuel)),
        final_mass_flows=state.mdot.copy())
    if out_dir is not None:
        record_outputs(result, out_dir)
    return result


def run_sealed_audit(network: NetworkConfig, schedule: DecayHeatSchedule,
                     duration, *, pressure=7.0e6,
                     initial_temperature=763.15, buoyancy_tables=True):
    """Sealed run from rest for conservation audits; returns the state."""
    if not duration > 0.0:
        raise ScenarioError("duration must be positive")
    table = build_helium_table(pressure=pressure)
    aided = build_lookup_table("aided") if buoyancy_tables else None
    opposed = build_lookup_table("opposed") if buoyancy_tables else None
    state = NetworkState(network, table, aided_table=aided,
                         opposed_table=opposed, mode="sealed",
                         pressure=pressure,
                         initial_temperature=initial_temperature,
                         schedule=schedule)
    while state.time < duration - 1.0e-9:
        state.step()
    return state, _audit_summary(state)


# ---------------------------------------------------------------------------
# output files


def _write_csv(path, header, columns):
    cols = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for i in range(cols[0].size):
            f.write(",".join(f"{c[i]:.17g}" for c in cols) + "\n")


def write_ramp_csv(result: RampResult, path):
    _write_csv(path, ("time", "velocity", "cf_quasi_steady", "cf_brunone"),
               (result.time, result.velocity, result.cf_quasi_steady,
                result.cf_brunone))


def write_pipe_csv(profile: PipeProfile, path):
    _write_csv(path, ("position", "t_bulk", "t_wall", "pressure", "cf",
                      "nu"),
               (profile.position, profile.t_bulk, profile.t_wall,
                profile.pressure, profile.c_f, profile.nu))


def write_conditions_csv(rows, path):
    _write_csv(path, ("velocity", "heat_flux", "reynolds", "bo_reference",
                      "bo_scaled", "aided_ratio", "opposed_ratio"),
               ([r.condition.velocity for r in rows],
                [r.condition.heat_flux for r in rows],
                [r.condition.reynolds for r in rows],
                [r.condition.bo_star for r in rows],
                [r.bo_scaled for r in rows],
                [r.aided_ratio for r in rows],
                [r.opposed_ratio for r in rows]))


def _time_tag(t):
    return f"{t:g}".replace(".", "p").replace("-", "m")


def _write_system_csv(path, columns):
    times, pressure, fraction, flows = columns
    header = ["time", "pressure", "power_fraction"]
    cols = [times, pressure, fraction]
    for i in range(flows.shape[1] if flows.size else 0):
        header.append(f"mdot_ch{i}")
        cols.append(flows[:, i])
    _write_csv(path, header, cols)


def record_outputs(result: LofaResult, out_dir):
    """Write every recorded series of one network run under out_dir.

    Per probe one time-history file, per line and snapshot time one
    profile file, plus the steady-phase convergence log and a system
    trace per phase.  Returns the list of paths written.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    def emit(name, header, columns):
        path = os.path.join(out_dir, name)
        _write_csv(path, header, columns)
        paths.append(path)

    probe_header = ("time", "temperature", "velocity", "mass_flow")
    if result.steady is not None:
        for s in result.steady_series:
            emit(f"steady_probe_{s.probe.label}.csv", probe_header,
                 (s.times, s.temperature, s.velocity, s.mass_flow))
        emit("steady_convergence.csv", ("time", "max_relative_change"),
             (result.steady.times, result.steady.max_relative_change))
        path = os.path.join(out_dir, "steady_system.csv")
        _write_system_csv(path, result.steady_system)
        paths.append(path)
    for s in result.series:
        emit(f"transient_probe_{s.probe.label}.csv", probe_header,
             (s.times, s.temperature, s.velocity, s.mass_flow))
    path = os.path.join(out_dir, "transient_system.csv")
    _write_system_csv(path, result.system)
    paths.append(path)
    for snap in result.lines:
        emit(f"line_{snap.line.name}_t{_time_tag(snap.requested_time)}.csv",
             ("position", "temperature", "velocity"),
             (snap.positions, snap.temperature, snap.velocity))
    return paths


# ---------------------------------------------------------------------------
# digests


def _canonical(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _canonical(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, (tuple, list)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    return obj


def _digest(payload):
    text = json.dumps(_canonical(payload), sort_keys=True,
                      separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def scenario_digest(spec: ScenarioSpec):
    """Hash of the complete scenario definition."""
    return _digest(spec)


def lofa_state_digest(spec: ScenarioSpec):
    """Hash of what the sealed snapshot depends on.

    The decay schedule and run length are deliberately excluded: the
    forced phase is identical for both cases, so one steady checkpoint
    serves either sealed rerun.
    """
    if spec.kind != "lofa":
        raise ScenarioError("state digests apply to the network case")
    lofa = spec.lofa
    return _digest({"network": lofa.network, "boundary": lofa.boundary,
                    "steady": [lofa.steady_window, lofa.steady_tolerance,
                               lofa.steady_max_time]})


# ---------------------------------------------------------------------------
# configuration files


_MISSING = object()


def _expect_map(value, path):
    if not isinstance(value, dict):
        raise ScenarioError(f"{path}: expected an object, got "
                            f"{type(value).__name__}")
    return value


def _check_keys(mapping, allowed, path):
    for key in mapping:
        if key not in allowed:
            raise ScenarioError(f"{path}: unknown key {key!r}")


def _take(mapping, key, path, kind=None, default=_MISSING):
    if key not in mapping:
        if default is _MISSING:
            raise ScenarioError(f"{path}: missing required key {key!r}")
        return default
    value = mapping[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"{path}.{key}: expected a number, got "
                                f"{value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError(f"{path}.{key}: expected an integer, got "
                                f"{value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ScenarioError(f"{path}.{key}: expected a string, got "
                                f"{value!r}")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ScenarioError(f"{path}.{key}: expected true/false, got "
                                f"{value!r}")
        return value
    if kind is list:
        if not isinstance(value, list):
            raise ScenarioError(f"{path}.{key}: expected a list, got "
                                f"{value!r}")
        return value
    return value


def _float_list(values, path):
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ScenarioError(f"{path}[{i}]: expected a number, got "
                                f"{v!r}")
        out.append(float(v))
    return out


def _build(factory, kwargs, path):
    try:
        return factory(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def _dataclass_section(data, key, factory, path, defaults=None):
    raw = _expect_map(_take(data, key, path, default={}), f"{path}.{key}")
    allowed = {f.name for f in dataclasses.fields(factory)}
    _check_keys(raw, allowed, f"{path}.{key}")
    kwargs = dict(defaults or {})
    kwargs.update(raw)
    return _build(factory, kwargs, f"{path}.{key}")


def _material_section(data, key, default, path):
    if key not in data:
        return default
    raw = _expect_map(data[key], f"{path}.{key}")
    allowed = {"name", "conductivity_coeffs", "specific_heat_coeffs",
               "density", "t_valid"}
    _check_keys(raw, allowed, f"{path}.{key}")
    kwargs = {f.name: getattr(default, f.name)
              for f in dataclasses.fields(SolidMaterialModel)}
    kwargs.update(raw)
    for name in ("conductivity_coeffs", "specific_heat_coeffs", "t_valid"):
        kwargs[name] = tuple(_float_list(kwargs[name],
                                         f"{path}.{key}.{name}"))
    return _build(SolidMaterialModel, kwargs, f"{path}.{key}")


def _ramp_rows(data, path):
    rows = _take(data, "rows", path, default="table")
    if isinstance(rows, str):
        if rows == "table":
            return ramp_table_rows("both")
        if rows in ("up", "down"):
            return ramp_table_rows(rows)
        raise ScenarioError(f"{path}.rows: expected 'table', 'up', 'down' "
                            f"or a list, got {rows!r}")
    if not isinstance(rows, list) or not rows:
        raise ScenarioError(f"{path}.rows: expected a non-empty list")
    out = []
    allowed = {f.name for f in dataclasses.fields(RampSpec)}
    for i, raw in enumerate(rows):
        entry = _expect_map(raw, f"{path}.rows[{i}]")
        _check_keys(entry, allowed, f"{path}.rows[{i}]")
        out.append(_build(RampSpec, entry, f"{path}.rows[{i}]"))
    return tuple(out)


def _probes_section(data, path):
    if "probes" not in data:
        return DEFAULT_LOFA_PROBES
    out = []
    allowed = {f.name for f in dataclasses.fields(ProbeSpec)}
    for i, raw in enumerate(_take(data, "probes", path, kind=list)):
        entry = _expect_map(raw, f"{path}.probes[{i}]")
        _check_keys(entry, allowed, f"{path}.probes[{i}]")
        out.append(_build(ProbeSpec, entry, f"{path}.probes[{i}]"))
    return tuple(out)


def _lines_section(data, path):
    if "lines" not in data:
        return DEFAULT_LOFA_LINES
    out = []
    allowed = {f.name for f in dataclasses.fields(LineSpec)}
    for i, raw in enumerate(_take(data, "lines", path, kind=list)):
        entry = _expect_map(raw, f"{path}.lines[{i}]")
        _check_keys(entry, allowed, f"{path}.lines[{i}]")
        kwargs = dict(entry)
        kwargs["points"] = tuple(tuple(p) for p in kwargs.get("points", ()))
        if kwargs.get("positions") is not None:
            kwargs["positions"] = tuple(kwargs["positions"])
        out.append(_build(LineSpec, kwargs, f"{path}.lines[{i}]"))
    return tuple(out)


def _lofa_from_config(data, path):
    allowed = {"kind", "case", "duration", "output_cadence",
               "snapshot_times", "geometry", "network", "materials",
               "correlations", "control", "boundary", "steady", "probes",
               "lines"}
    _check_keys(data, allowed, path)
    geometry = _dataclass_section(data, "geometry", ChannelGeometry, path)
    correlations = _dataclass_section(data, "correlations",
                                      CorrelationConfig, path)
    control = _dataclass_section(data, "control", StepControl, path)

    mats = _expect_map(_take(data, "materials", path, default={}),
                       f"{path}.materials")
    _check_keys(mats, {"fuel", "web"}, f"{path}.materials")
    fuel = _material_section(mats, "fuel", FUEL_COMPACT, f"{path}.materials")
    web = _material_section(mats, "web", GRAPHITE_WEB, f"{path}.materials")

    base = default_lofa_network()
    net_defaults = {
        "power_factors": base.power_factors,
        "nominal_power_density": base.nominal_power_density,
        "fuel_area": base.fuel_area,
        "web_area": base.web_area,
        "g_fuel_web": base.g_fuel_web,
        "g_web_surface": base.g_web_surface,
        "lateral_links": base.lateral_links,
        "periphery_links": base.periphery_links,
        "periphery_temperature": base.periphery_temperature,
        "plenum_volume": base.plenum_volume,
        "gravity": base.gravity,
    }
    raw_net = _expect_map(_take(data, "network", path, default={}),
                          f"{path}.network")
    _check_keys(raw_net, set(net_defaults), f"{path}.network")
    kwargs = dict(net_defaults)
    kwargs.update(raw_net)
    kwargs["power_factors"] = tuple(
        _float_list(kwargs["power_factors"], f"{path}.network.power_factors"))
    kwargs["lateral_links"] = tuple(
        tuple(link) for link in kwargs["lateral_links"])
    kwargs["periphery_links"] = tuple(
        tuple(link) for link in kwargs["periphery_links"])
    network = _build(NetworkConfig, dict(
        kwargs, geometry=geometry, n_channels=len(kwargs["power_factors"]),
        fuel_material=fuel, web_material=web, correlations=correlations,
        control=control), f"{path}.network")

    bnd = _expect_map(_take(data, "boundary", path, default={}),
                      f"{path}.boundary")
    _check_keys(bnd, {"total_mdot", "full_core_channels",
                      "inlet_temperature", "pressure"}, f"{path}.boundary")
    steady = _expect_map(_take(data, "steady", path, default={}),
                         f"{path}.steady")
    _check_keys(steady, {"window", "tolerance", "max_time"},
                f"{path}.steady")

    case_id = _take(data, "case", path, kind=int, default=1)
    return build_lofa_case(
        case_id,
        network=network,
        duration=_take(data, "duration", path, kind=float, default=1000.0),
        output_cadence=_take(data, "output_cadence", path, kind=float,
                             default=1.0),
        probes=_probes_section(data, path),
        lines=_lines_section(data, path),
        snapshot_times=tuple(_float_list(
            _take(data, "snapshot_times", path, kind=list,
                  default=[503.0]), f"{path}.snapshot_times")),
        total_mdot=_take(bnd, "total_mdot", f"{path}.boundary", kind=float,
                         default=14.35),
        full_core_channels=_take(bnd, "full_core_channels",
                                 f"{path}.boundary", kind=int,
                                 default=1020),
        inlet_temperature=_take(bnd, "inlet_temperature", f"{path}.boundary",
                                kind=float, default=763.15),
        pressure=_take(bnd, "pressure", f"{path}.boundary", kind=float,
                       default=7.0e6),
        steady_window=_take(steady, "window", f"{path}.steady", kind=float,
                            default=10.0),
        steady_tolerance=_take(steady, "tolerance", f"{path}.steady",
                               kind=float, default=1.0e-6),
        steady_max_time=_take(steady, "max_time", f"{path}.steady",
                              kind=float, default=3000.0))


def scenarios_from_config(data, path="config"):
    """Turn one parsed configuration mapping into scenario specs.

    Ramp configurations expand to one spec per row; every other kind
    yields exactly one.  All schema violations raise ScenarioError with
    the offending key path in the message.
    """
    data = _expect_map(data, path)
    kind = _take(data, "kind", path, kind=str)
    if kind == "ramp":
        allowed = {"kind", "rows", "samples_per_phase"}
        _check_keys(data, allowed, path)
        samples = _take(data, "samples_per_phase", path, kind=int,
                        default=200)
        return tuple(build_ramp_case(row, samples_per_phase=samples)
                     for row in _ramp_rows(data, path))
    if kind == "pipe":
        allowed = {"kind"} | {f.name for f in dataclasses.fields(PipeSpec)}
        _check_keys(data, allowed, path)
        kwargs = {k: v for k, v in data.items() if k != "kind"}
        if "exponents" in kwargs:
            kwargs["exponents"] = tuple(_float_list(
                _take(data, "exponents", path, kind=list),
                f"{path}.exponents"))
        return (_build(build_pipe_case, kwargs, path),)
    if kind == "buoyancy_point":
        allowed = {"kind", "conditions", "prandtl", "c_constant"}
        _check_keys(data, allowed, path)
        conds = []
        if "conditions" in data:
            for i, raw in enumerate(_take(data, "conditions", path,
                                          kind=list)):
                vals = _float_list(raw, f"{path}.conditions[{i}]")
                if len(vals) != 4:
                    raise ScenarioError(
                        f"{path}.conditions[{i}]: expected "
                        f"[velocity, heat_flux, reynolds, bo_star]")
                conds.append(_build(FlowCondition, dict(zip(
                    ("velocity", "heat_flux", "reynolds", "bo_star"),
                    vals)), f"{path}.conditions[{i}]"))
        else:
            conds = list(TABLE_FLOW_CONDITIONS)
        return (_build(build_buoyancy_case, {
            "conditions": tuple(conds),
            "prandtl": _take(data, "prandtl", path, kind=float,
                             default=0.66),
            "c_constant": _take(data, "c_constant", path, kind=float,
                                default=DEFAULT_C)}, path),)
    if kind == "lofa":
        return (_lofa_from_config(data, path),)
    raise ScenarioError(f"{path}.kind: unknown scenario kind {kind!r}")
