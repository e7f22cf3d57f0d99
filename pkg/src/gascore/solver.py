"""Transient solver for a sealed or through-flow channel network.

The network is a set of parallel vertical coolant channels joined by an
upper and a lower plenum.  Each channel carries one signed flow rate
(positive upward) on a shared axial grid.  Heated levels couple to a
two-node solid stack per channel (fuel compact + graphite web) with lateral
web-to-web links and a fixed-temperature periphery boundary; the channel
wall itself is a massless surface station whose temperature follows from
flux continuity between the web conductance and the convective film.

Per-step sequence, fixed by construction:

1. thermal closure (film coefficient, wall temperature, wall heat flux) at
   the start-of-step state,
2. pressure balance and flow split across the channels, semi-implicit in
   the flow rate with friction linearised at the current speed,
3. explicit-upwind fluid advection with an implicit film term, then
   explicit well-mixed plenum updates,
4. one backward-Euler conduction solve per heated level (fuel and web of
   every channel coupled simultaneously),
5. sealed mode only: algebraic system-pressure update that keeps the total
   gas inventory exact, plus its compression-heating correction.

Energy bookkeeping is arranged so that every joule exchanged between fluid
and solid appears with the same sign and magnitude on both sides; the
remaining audit residual measures genuine discretisation error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .buoyancy import NuRatioTable, lookup_arrays
from .correlations import (LAMINAR_NU, BulkState, CorrelationConfig,
                           brunone_k3, petukhov_cf0, petukhov_nu,
                           steady_friction)
from .properties import FluidPropertyTable, SolidMaterialModel

__all__ = [
    "SolverError",
    "ChannelGeometry",
    "DecayHeatSchedule",
    "decay_power_fraction",
    "StepControl",
    "PlenumState",
    "OpenBoundary",
    "NetworkConfig",
    "NetworkState",
    "AxialFluidNode",
    "SolidNode",
    "StepReport",
    "WallIterationResult",
    "wall_temperature_iteration",
    "channel_pressure_flow",
    "network_flow_split",
    "step",
    "seal_boundaries",
    "save_checkpoint",
    "load_checkpoint",
]

CHECKPOINT_FORMAT = "gascore-checkpoint-1"

# Near-zero flow scale: below this the relative flow-split tolerance would
# chase summation roundoff, so an absolute floor of 1e-15 kg/s applies.
_SPLIT_ABS_FLOOR = 1.0e-15


class SolverError(RuntimeError):
    """Raised when an iteration or step controller fails to converge."""


# ---------------------------------------------------------------------------
# static description


@dataclass(frozen=True)
class ChannelGeometry:
    """Axial layout of one coolant channel.

    The grid spans lower reflector, heated section and upper reflector with
    uniform spacing; a node counts as heated when its centre falls inside
    the heated span.  Heated per-node quantities are normalised by
    heated_length/n_heated so that totals are independent of the grid.
    """

    diameter: float = 0.01588
    heated_length: float = 7.93
    lower_reflector_length: float = 1.585
    upper_reflector_length: float = 1.189
    axial_nodes: int = 27
    flow_area: float | None = None
    k_entry: float = 0.5
    k_exit: float = 1.0

    def __post_init__(self):
        if not self.diameter > 0.0:
            raise ValueError(f"diameter must be positive, got {self.diameter!r}")
        if not self.heated_length > 0.0:
            raise ValueError("heated_length must be positive")
        if self.lower_reflector_length < 0.0 or self.upper_reflector_length < 0.0:
            raise ValueError("reflector lengths must be non-negative")
        if self.axial_nodes < 2:
            raise ValueError("need at least two axial nodes")
        if self.flow_area is None:
            object.__setattr__(self, "flow_area",
                               math.pi * self.diameter ** 2 / 4.0)
        elif not self.flow_area > 0.0:
            raise ValueError("flow_area must be positive")
        if self.k_entry < 0.0 or self.k_exit < 0.0:
            raise ValueError("form-loss coefficients must be non-negative")
        if self.heated_indices().size == 0:
            raise ValueError("grid too coarse: no node centre falls in the "
                             "heated span")

    @property
    def total_length(self):
        return (self.lower_reflector_length + self.heated_length
                + self.upper_reflector_length)

    @property
    def dz(self):
        return self.total_length / self.axial_nodes

    @property
    def heated_perimeter(self):
        return math.pi * self.diameter

    def node_centers(self):
        return (np.arange(self.axial_nodes) + 0.5) * self.dz

    def heated_indices(self):
        z = (np.arange(self.axial_nodes) + 0.5) * self.dz
        lo = self.lower_reflector_length
        hi = lo + self.heated_length
        return np.nonzero((z > lo) & (z < hi))[0]


@dataclass(frozen=True)
class DecayHeatSchedule:
    """Post-trip power as a fraction of rated power.

    mode "constant" holds constant_fraction.  mode "decay_law" evaluates
    0.066*(t**-0.2 - (t + operating_time)**-0.2) clamped from above by
    clamp_fraction; at and before t = 0 the clamp value applies.
    """

    mode: str = "decay_law"
    constant_fraction: float = 0.10
    clamp_fraction: float = 0.10
    operating_time: float = 3.156e7   # s at rated power before the trip

    def __post_init__(self):
        if self.mode not in ("constant", "decay_law"):
            raise ValueError(f"unknown decay-heat mode {self.mode!r}")
        if self.constant_fraction < 0.0 or self.clamp_fraction < 0.0:
            raise ValueError("power fractions must be non-negative")
        if not self.operating_time > 0.0:
            raise ValueError("operating_time must be positive")


def decay_power_fraction(schedule: DecayHeatSchedule, t):
    """Power fraction at time t (seconds after the trip)."""
    if schedule.mode == "constant":
        return schedule.constant_fraction
    if t <= 0.0:
        return schedule.clamp_fraction
    raw = 0.066 * (t ** -0.2 - (t + schedule.operating_time) ** -0.2)
    return min(schedule.clamp_fraction, raw)


@dataclass(frozen=True)
class StepControl:
    """Adaptive time-step and wall-iteration settings."""

    cfl_target: float = 0.5
    dt_max: float = 0.25
    dt_initial: float = 1.0e-3
    dt_growth: float = 1.2
    dt_min: float = 1.0e-9
    max_dt_retries: int = 10
    wall_tolerance: float = 0.01      # K
    wall_relaxation: float = 0.5
    max_wall_iterations: int = 50

    def __post_init__(self):
        if not 0.0 < self.cfl_target <= 1.0:
            raise ValueError("cfl_target must be in (0, 1]")
        if not 0.0 < self.dt_min <= self.dt_initial <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_initial <= dt_max")
        if not self.dt_growth >= 1.0:
            raise ValueError("dt_growth must be >= 1")
        if not 0.0 < self.wall_relaxation <= 1.0:
            raise ValueError("wall_relaxation must be in (0, 1]")
        if self.max_wall_iterations < 1 or self.max_dt_retries < 1:
            raise ValueError("iteration limits must be positive")
        if not self.wall_tolerance > 0.0:
            raise ValueError("wall_tolerance must be positive")


@dataclass
class PlenumState:
    """Well-mixed plenum: one temperature, fixed volume."""

    temperature: float
    volume: float


@dataclass(frozen=True)
class OpenBoundary:
    """Imposed through-flow for the open (forced circulation) mode.

    mdot_total is the signed net flow through the network, positive upward;
    the inlet plenum is the upper one when the flow is downward.
    """

    mdot_total: float
    inlet_temperature: float
    pressure: float

    def __post_init__(self):
        if not self.pressure > 0.0:
            raise ValueError("boundary pressure must be positive")
        if not self.inlet_temperature > 0.0:
            raise ValueError("inlet temperature must be positive")


@dataclass(frozen=True)
class NetworkConfig:
    """Static description of the channel network and its solid structure.

    Conductances are per metre of heated length: g_fuel_web couples each
    channel's fuel node to its web node, g_web_surface couples the web to
    the massless channel surface, lateral_links couple webs of neighbouring
    channels and periphery_links couple webs to the fixed-temperature
    periphery boundary.
    """

    geometry: ChannelGeometry
    n_channels: int
    power_factors: tuple
    nominal_power_density: float      # W/m3 of fuel at rated power
    fuel_area: float                  # m2 fuel cross-section per channel
    web_area: float                   # m2 web cross-section per channel
    fuel_material: SolidMaterialModel
    web_material: SolidMaterialModel
    g_fuel_web: float                 # W/(m*K)
    g_web_surface: float              # W/(m*K)
    lateral_links: tuple = ()         # ((i, j, g_per_m), ...)
    periphery_links: tuple = ()       # ((i, g_per_m), ...)
    periphery_temperature: float = 763.15
    plenum_volume: float = 0.05
    gravity: float = 9.81
    correlations: CorrelationConfig = CorrelationConfig()
    control: StepControl = StepControl()

    def __post_init__(self):
        if self.n_channels < 1:
            raise ValueError("need at least one channel")
        factors = tuple(float(f) for f in self.power_factors)
        object.__setattr__(self, "power_factors", factors)
        if len(factors) != self.n_channels:
            raise ValueError("power_factors length must match n_channels")
        if any(not f > 0.0 for f in factors):
            raise ValueError("power factors must be positive")
        if not self.nominal_power_density > 0.0:
            raise ValueError("nominal_power_density must be positive")
        if not self.fuel_area > 0.0 or not self.web_area > 0.0:
            raise ValueError("solid cross-sections must be positive")
        if not self.g_fuel_web > 0.0 or not self.g_web_surface > 0.0:
            raise ValueError("fuel-web and web-surface conductances must be "
                             "positive")
        lat = tuple((int(i), int(j), float(g)) for i, j, g in self.lateral_links)
        object.__setattr__(self, "lateral_links", lat)
        for i, j, g in lat:
            if i == j or not (0 <= i < self.n_channels) \
                    or not (0 <= j < self.n_channels):
                raise ValueError(f"bad lateral link ({i}, {j})")
            if not g > 0.0:
                raise ValueError("link conductances must be positive")
        per = tuple((int(i), float(g)) for i, g in self.periphery_links)
        object.__setattr__(self, "periphery_links", per)
        for i, g in per:
            if not (0 <= i < self.n_channels) or not g > 0.0:
                raise ValueError(f"bad periphery link ({i}, {g})")
        if not self.periphery_temperature > 0.0:
            raise ValueError("periphery temperature must be positive")
        if not self.plenum_volume > 0.0:
            raise ValueError("plenum_volume must be positive")
        if self.gravity < 0.0:
            raise ValueError("gravity must be non-negative")


# ---------------------------------------------------------------------------
# node views


@dataclass(frozen=True)
class AxialFluidNode:
    """Read-only view of one fluid node."""

    channel: int
    index: int
    elevation: float
    temperature: float
    velocity: float
    heated: bool
    wall_temperature: float | None
    heat_flux: float | None


@dataclass(frozen=True)
class SolidNode:
    """Read-only view of one solid node."""

    kind: str           # "fuel" or "web"
    channel: int
    level: int
    temperature: float
    volume: float
    material: str


@dataclass(frozen=True)
class StepReport:
    """Diagnostics for one accepted step."""

    time: float
    dt: float
    pressure: float
    power_fraction: float
    dp: float
    split_residual: float
    courant: float
    wall_iterations: int


@dataclass
class AuditTrail:
    """Cumulative conservation bookkeeping since the last reset."""

    e_source: float = 0.0        # decay/rated heat deposited in fuel, J
    e_boundary_in: float = 0.0   # enthalpy carried in by the open boundary, J
    e_boundary_out: float = 0.0  # enthalpy carried out, J
    e_periphery: float = 0.0     # conduction to the periphery boundary, J
    e_reference: float = 0.0     # stored energy at the reset, J
    mass_reference: float = 0.0  # gas inventory at the reset, kg
    max_courant: float = 0.0
    max_split_ratio: float = 0.0
    max_mass_drift: float = 0.0
    wall_iterations_peak: int = 0


# ---------------------------------------------------------------------------
# wall closure


@dataclass(frozen=True)
class WallIterationResult:
    """Converged wall state for one node."""

    wall_temperature: float
    heat_flux: float          # W/m2, positive into the fluid
    film_coefficient: float   # W/(m2*K)
    nusselt: float            # buoyancy-adjusted
    buoyancy_ratio: float
    iterations: int


def _forced_nu(re, pr, corr, ccfg: CorrelationConfig):
    """Blended forced-convection Nusselt number, elementwise.

    Laminar constant below re_laminar, property-corrected friction-based
    correlation above re_turbulent (evaluated at the floored Reynolds
    number), log-linear blend in between.
    """
    re_floor = np.maximum(re, ccfg.re_turbulent)
    cf = petukhov_cf0(re_floor) * corr
    nu_turb = petukhov_nu(re_floor, pr, cf)
    nu = np.full_like(re, LAMINAR_NU)
    turb = re >= ccfg.re_turbulent
    mid = (re > ccfg.re_laminar) & ~turb
    nu[turb] = nu_turb[turb]
    if np.any(mid):
        w = (np.log(re[mid] / ccfg.re_laminar)
             / math.log(ccfg.re_turbulent / ccfg.re_laminar))
        nu[mid] = np.exp((1.0 - w) * math.log(LAMINAR_NU)
                         + w * np.log(nu_turb[mid]))
    return nu


def _wall_loop(t_b, rho_b, mu_b, lam_b, cp_b, u, table: FluidPropertyTable,
               ccfg: CorrelationConfig, aided, opposed, gravity, diameter,
               t_w0, *, q_fixed=None, t_web=None, g_ws=None, a_film=None,
               tol=0.01, relax=0.5, max_iter=50):
    """Damped fixed-point iteration for the wall surface temperature.

    Either q_fixed (imposed wall heat flux, W/m2 into the fluid) or the
    conjugate triple (t_web, g_ws, a_film) must be given; in the conjugate
    case the flux is re-evaluated from the web conductance every sweep.
    Returns (t_wall, q_wall, nu, ratio, h_film, corr, iterations).
    """
    conjugate = q_fixed is None
    if conjugate and (t_web is None or g_ws is None or a_film is None):
        raise ValueError("conjugate closure needs t_web, g_ws and a_film")

    pr = mu_b * cp_b / lam_b
    re = rho_b * np.abs(u) * diameter / mu_b
    t_w = np.array(t_w0, dtype=float, copy=True)

    def evaluate(t_wall):
        if conjugate:
            q = g_ws * (t_web - t_wall) / a_film
        else:
            q = q_fixed
        if ccfg.property_corrections:
            rho_w, mu_w, _, _, _ = table.interpolate_arrays(t_wall)
            corr = ((rho_w / rho_b) ** ccfg.density_exponent
                    * (mu_w / mu_b) ** ccfg.viscosity_exponent)
        else:
            corr = np.ones_like(t_wall)
        nu = _forced_nu(re, pr, corr, ccfg)
        ratio = np.ones_like(nu)
        if aided is not None and gravity > 0.0:
            nz = q != 0.0
            if np.any(nz):
                re_safe = np.maximum(re, 1.0)
                kin_visc = mu_b / rho_b
                gr = (gravity * (1.0 / t_b) * np.abs(q) * diameter ** 4
                      / (lam_b * kin_visc ** 2))
                bo = gr / (re_safe ** 3.425 * pr ** 0.8)
                same = np.sign(q) * np.sign(u) >= 0.0
                sel = nz & same
                if np.any(sel):
                    ratio[sel] = lookup_arrays(aided, bo[sel])
                sel = nz & ~same
                if np.any(sel):
                    ratio[sel] = lookup_arrays(opposed, bo[sel])
        nu_total = nu * ratio
        h_film = nu_total * lam_b / diameter
        return q, nu_total, ratio, h_film, corr

    iterations = 0
    for it in range(1, max_iter + 1):
        q, nu_total, ratio, h_film, corr = evaluate(t_w)
        if conjugate:
            # flux continuity solved linearly at the frozen film
            # coefficient; iterating on the raw flux form instead would
            # amplify by g_ws/(a_film*h) per sweep and diverge
            ga = g_ws / a_film
            t_prop = (h_film * t_b + ga * t_web) / (h_film + ga)
        else:
            t_prop = t_b + q / h_film
        res = float(np.max(np.abs(t_prop - t_w)))
        t_w = t_w + relax * (t_prop - t_w)
        iterations = it
        if res < tol:
            break
    else:
        raise SolverError(f"wall iteration did not converge in {max_iter} "
                          f"sweeps, residual {res:.3e} K")
    # final consistent outputs at the converged temperature
    q, nu_total, ratio, h_film, corr = evaluate(t_w)
    return t_w, q, nu_total, ratio, h_film, corr, iterations


def wall_temperature_iteration(bulk: BulkState, q_wall: float,
                               table: FluidPropertyTable, *,
                               cfg: CorrelationConfig = CorrelationConfig(),
                               aided: NuRatioTable | None = None,
                               opposed: NuRatioTable | None = None,
                               gravity: float = 9.81,
                               t_wall_start: float | None = None,
                               tolerance: float = 0.01,
                               relaxation: float = 0.5,
                               max_iterations: int = 50):
    """Converge the wall temperature for one node at an imposed heat flux."""
    if (aided is None) != (opposed is None):
        raise ValueError("aided and opposed tables must be given together")
    t_w0 = np.array([bulk.temperature if t_wall_start is None
                     else t_wall_start])
    t_w, q, nu, ratio, h_film, _, iterations = _wall_loop(
        np.array([bulk.temperature]), np.array([bulk.density]),
        np.array([bulk.viscosity]), np.array([bulk.conductivity]),
        np.array([bulk.specific_heat]), np.array([bulk.velocity]),
        table, cfg, aided, opposed, gravity, bulk.diameter, t_w0,
        q_fixed=np.array([float(q_wall)]), tol=tolerance, relax=relaxation,
        max_iter=max_iterations)
    return WallIterationResult(
        wall_temperature=float(t_w[0]), heat_flux=float(q[0]),
        film_coefficient=float(h_film[0]), nusselt=float(nu[0]),
        buoyancy_ratio=float(ratio[0]), iterations=iterations)


# ---------------------------------------------------------------------------
# momentum


def channel_pressure_flow(dp, mdot, weight, friction_coeff, alpha,
                          unsteady_dp=0.0):
    """Rate of change of one channel's flow, kg/s2.

    dp is the lower-minus-upper plenum pressure difference, weight the
    column weight integral sum(rho*g*dz), friction_coeff the linearised
    friction coefficient (Pa per kg/s, evaluated at the current speed) and
    alpha = flow_area/total_length the channel inertia factor.
    """
    return alpha * (dp - weight - unsteady_dp - friction_coeff * mdot)


def network_flow_split(mdot, weight, unsteady_dp, friction_coeff, alpha, dt,
                       target):
    """Common pressure difference that makes the channel flows sum to target.

    Each channel is advanced semi-implicitly, so the summed new flow is
    affine and increasing in dp; the affine solution is computed directly
    and verified, with a bracketing bisection as fallback.  Returns
    (dp, mdot_new, residual).
    """
    mdot = np.asarray(mdot, dtype=float)
    weight = np.asarray(weight, dtype=float)
    unsteady_dp = np.asarray(unsteady_dp, dtype=float)
    friction_coeff = np.asarray(friction_coeff, dtype=float)
    if np.any(friction_coeff < 0.0):
        raise ValueError("friction coefficients must be non-negative")
    denom = 1.0 + dt * alpha * friction_coeff

    def split(dp):
        return (mdot + dt * alpha * (dp - weight - unsteady_dp)) / denom

    c1 = float(np.sum(dt * alpha / denom))
    c0 = float(np.sum((mdot - dt * alpha * (weight + unsteady_dp)) / denom))
    dp = (target - c0) / c1
    mdot_new = split(dp)
    resid = float(np.sum(mdot_new) - target)
    allowed = max(1.0e-9 * float(np.max(np.abs(mdot_new))), _SPLIT_ABS_FLOOR)
    if abs(resid) > allowed:
        # affine arithmetic failed to close; fall back to bracketing
        width = max(abs(dp), 1.0)
        lo, hi = dp - width, dp + width
        for _ in range(200):
            if np.sum(split(lo)) - target < 0.0 < np.sum(split(hi)) - target:
                break
            lo -= width
            hi += width
            width *= 2.0
        else:
            raise SolverError("flow split could not bracket the target")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            r = float(np.sum(split(mid)) - target)
            if r > 0.0:
                hi = mid
            else:
                lo = mid
            if abs(r) <= allowed:
                dp = mid
                mdot_new = split(mid)
                resid = r
                break
        else:
            raise SolverError("flow split bisection did not converge")
    return dp, mdot_new, resid


# ---------------------------------------------------------------------------
# network state


class NetworkState:
    """Mutable state of the channel network plus its audit trail."""

    def __init__(self, config: NetworkConfig, table: FluidPropertyTable, *,
                 aided_table: NuRatioTable | None = None,
                 opposed_table: NuRatioTable | None = None,
                 mode: str = "sealed",
                 boundary: OpenBoundary | None = None,
                 pressure: float = 7.0e6,
                 initial_temperature: float = 763.15,
                 schedule: DecayHeatSchedule | None = None):
        if mode not in ("open", "sealed"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "open" and boundary is None:
            raise ValueError("open mode needs an OpenBoundary")
        if mode == "sealed" and boundary is not None:
            raise ValueError("sealed mode takes no boundary")
        if (aided_table is None) != (opposed_table is None):
            raise ValueError("aided and opposed tables must be given together")
        if not (table.t_min <= initial_temperature <= table.t_max):
            raise ValueError("initial temperature outside the property table")

        self.cfg = config
        self.table = table
        self.aided = aided_table
        self.opposed = opposed_table
        self.mode = mode
        self.boundary = boundary
        self.schedule = schedule
        self.pressure = boundary.pressure if mode == "open" else float(pressure)

        geo = config.geometry
        n = config.n_channels
        k = geo.axial_nodes
        self._heated = geo.heated_indices()
        h = self._heated.size
        self._dz = geo.dz
        self._dz_heat = geo.heated_length / h
        self._v_node = geo.flow_area * self._dz
        self._a_film = geo.heated_perimeter * self._dz_heat
        self._g_ws = config.g_web_surface * self._dz_heat
        self._v_fuel = config.fuel_area * self._dz_heat
        self._v_web = config.web_area * self._dz_heat
        factors = np.asarray(config.power_factors, dtype=float)
        # rated power per heated node, W
        self._p_node = (config.nominal_power_density * self._v_fuel
                        * factors[:, None] * np.ones((1, h)))
        self._alpha = geo.flow_area / geo.total_length

        # level-invariant conduction stencil: [fuel block | web block]
        g_fw = config.g_fuel_web * self._dz_heat
        cond = np.zeros((2 * n, 2 * n))
        rng = np.arange(n)
        cond[rng, rng] += g_fw
        cond[rng, n + rng] -= g_fw
        cond[n + rng, rng] -= g_fw
        cond[n + rng, n + rng] += g_fw
        for i, j, g in config.lateral_links:
            gl = g * self._dz_heat
            cond[n + i, n + i] += gl
            cond[n + j, n + j] += gl
            cond[n + i, n + j] -= gl
            cond[n + j, n + i] -= gl
        per_b = np.zeros(2 * n)
        for i, g in config.periphery_links:
            gp = g * self._dz_heat
            cond[n + i, n + i] += gp
            per_b[n + i] += gp * config.periphery_temperature
        self._cond = cond
        self._per_b = per_b

        t0 = float(initial_temperature)
        self.t_fluid = np.full((n, k), t0)
        self.t_wall = np.full((n, h), t0)
        self.t_fuel = np.full((n, h), t0)
        self.t_web = np.full((n, h), t0)
        self.q_wall = np.zeros((n, h))
        self.u_prev = np.zeros((n, k))
        self.mdot = np.zeros(n)
        if mode == "open":
            self.mdot[:] = boundary.mdot_total / n
        self.plenum_upper = PlenumState(t0, config.plenum_volume)
        self.plenum_lower = PlenumState(t0, config.plenum_volume)

        self.time = 0.0
        self.time_sealed = 0.0 if mode == "sealed" else None
        self.dt_prev = None
        self.step_count = 0
        self.sealed_mass = None
        self.audit = AuditTrail()
        if mode == "sealed":
            self.sealed_mass = self.total_gas_mass()
        self.reset_audits()

    # -- thermodynamic helpers ------------------------------------------

    @property
    def density_scale(self):
        """Ideal-gas pressure scaling applied to tabulated densities."""
        return self.pressure / self.table.pressure

    def fluid_props(self):
        """Bulk properties on the fluid grid; density at system pressure."""
        rho, mu, lam, cp, h = self.table.interpolate_arrays(self.t_fluid)
        return rho * self.density_scale, mu, lam, cp, h

    def velocities(self, rho):
        return self.mdot[:, None] / (rho * self.cfg.geometry.flow_area)

    def total_gas_mass(self):
        """Channel plus plena gas inventory at the current pressure, kg."""
        rho_t, _, _, _, _ = self.table.interpolate_arrays(self.t_fluid)
        mass = float(np.sum(rho_t)) * self._v_node
        for pl in (self.plenum_upper, self.plenum_lower):
            s = self.table.interpolate(pl.temperature)
            mass += s.density * pl.volume
        return mass * self.density_scale

    def energy_state(self):
        """Stored energy, J: fluid internal energy plus solid internal energy.

        Fluid specific internal energy is h - p_ref/rho_ref(T), which for an
        ideal-gas table is pressure independent; masses carry the current
        pressure scaling.  Kinetic energy is excluded by design.
        """
        rho_t, _, _, _, h = self.table.interpolate_arrays(self.t_fluid)
        u = h - self.table.pressure / rho_t
        e = float(np.sum(rho_t * u)) * self._v_node * self.density_scale
        for pl in (self.plenum_upper, self.plenum_lower):
            s = self.table.interpolate(pl.temperature)
            e += (s.density * self.density_scale * pl.volume
                  * (s.enthalpy - self.table.pressure / s.density))
        fuel = self.cfg.fuel_material
        web = self.cfg.web_material
        e += float(np.sum(fuel.internal_energy(self.t_fuel))) \
            * fuel.density * self._v_fuel
        e += float(np.sum(web.internal_energy(self.t_web))) \
            * web.density * self._v_web
        return e

    def reset_audits(self):
        self.audit = AuditTrail(
            e_reference=self.energy_state(),
            mass_reference=self.total_gas_mass())

    def energy_residual(self):
        """(residual J, residual relative to booked energy turnover)."""
        a = self.audit
        de = self.energy_state() - a.e_reference
        booked = (a.e_source + a.e_boundary_in - a.e_boundary_out
                  - a.e_periphery)
        resid = de - booked
        scale = max(a.e_source, abs(booked), 1.0)
        return resid, abs(resid) / scale

    # -- node views -----------------------------------------------------

    def fluid_node(self, channel, index):
        rho, _, _, _, _ = self.fluid_props()
        z = self.cfg.geometry.node_centers()[index]
        pos = np.nonzero(self._heated == index)[0]
        heated = pos.size > 0
        return AxialFluidNode(
            channel=channel, index=index, elevation=float(z),
            temperature=float(self.t_fluid[channel, index]),
            velocity=float(self.velocities(rho)[channel, index]),
            heated=heated,
            wall_temperature=float(self.t_wall[channel, pos[0]])
            if heated else None,
            heat_flux=float(self.q_wall[channel, pos[0]]) if heated else None)

    def solid_nodes(self):
        fuel = self.cfg.fuel_material.name
        web = self.cfg.web_material.name
        for i in range(self.cfg.n_channels):
            for lev in range(self._heated.size):
                yield SolidNode("fuel", i, lev,
                                float(self.t_fuel[i, lev]), self._v_fuel, fuel)
                yield SolidNode("web", i, lev,
                                float(self.t_web[i, lev]), self._v_web, web)

    def conductance_links(self):
        """Per-level links as (end_a, end_b, W/K); periphery end is a string."""
        links = []
        g_fw = self.cfg.g_fuel_web * self._dz_heat
        for lev in range(self._heated.size):
            for i in range(self.cfg.n_channels):
                links.append((("fuel", i, lev), ("web", i, lev), g_fw))
            for i, j, g in self.cfg.lateral_links:
                links.append((("web", i, lev), ("web", j, lev),
                              g * self._dz_heat))
            for i, g in self.cfg.periphery_links:
                links.append((("web", i, lev), "periphery",
                              g * self._dz_heat))
        return links

    # -- stepping -------------------------------------------------------

    def _closure(self, rho, mu, lam, cp, u):
        hi = self._heated
        ccfg = self.cfg.correlations
        ctr = self.cfg.control
        t_w, q, nu, ratio, h_film, corr, iters = _wall_loop(
            self.t_fluid[:, hi], rho[:, hi], mu[:, hi], lam[:, hi],
            cp[:, hi], u[:, hi], self.table, ccfg, self.aided, self.opposed,
            self.cfg.gravity, self.cfg.geometry.diameter, self.t_wall,
            t_web=self.t_web, g_ws=self._g_ws, a_film=self._a_film,
            tol=ctr.wall_tolerance, relax=ctr.wall_relaxation,
            max_iter=ctr.max_wall_iterations)
        return t_w, q, h_film, corr, iters

    def _momentum_coefficients(self, rho, mu, u, corr_heated):
        """Column weight, linear friction coefficient and unsteady term."""
        geo = self.cfg.geometry
        ccfg = self.cfg.correlations
        d = geo.diameter
        a = geo.flow_area
        absu = np.abs(u)
        re = rho * absu * d / mu
        # phi = c_f*|U| with the laminar branch taken analytically so the
        # zero-flow limit stays finite
        phi = np.empty_like(re)
        lam_m = re <= ccfg.re_laminar
        phi[lam_m] = 64.0 * mu[lam_m] / (rho[lam_m] * d)
        rest = ~lam_m
        if np.any(rest):
            if ccfg.petukhov_friction_base:
                cf = petukhov_cf0(re[rest])
            else:
                cf = steady_friction(re[rest], ccfg)
            phi[rest] = cf * absu[rest]
        if ccfg.property_corrections:
            corr = np.ones_like(phi)
            corr[:, self._heated] = corr_heated
            phi = phi * corr
        weight = self.cfg.gravity * self._dz * np.sum(rho, axis=1)
        fric = self._dz / (2.0 * d * a) * np.sum(phi, axis=1)
        # form losses at the flow-dependent entry/exit ends
        down = self.mdot < 0.0
        i_in = np.where(down, re.shape[1] - 1, 0)
        i_out = np.where(down, 0, re.shape[1] - 1)
        rows = np.arange(re.shape[0])
        fric = fric + (geo.k_entry * absu[rows, i_in]
                       + geo.k_exit * absu[rows, i_out]) / (2.0 * a)
        unsteady = np.zeros(re.shape[0])
        if ccfg.brunone_enabled and self.dt_prev is not None:
            accel = (u - self.u_prev) / self.dt_prev
            live = (absu > ccfg.velocity_floor) & (re > 0.0)
            if np.any(live):
                k3 = np.zeros_like(re)
                k3[live] = brunone_k3(re[live], ccfg)
                unsteady = np.sum(
                    np.where(live, k3 * rho * accel * self._dz / 2.0, 0.0),
                    axis=1)
        return weight, fric, unsteady

    def _power_fraction(self):
        if self.schedule is None:
            return 1.0
        base = self.time_sealed if self.time_sealed is not None else 0.0
        return decay_power_fraction(self.schedule, self.time - base)

    def step(self):
        """Advance one adaptive time step; returns a StepReport."""
        cfg = self.cfg
        ctr = cfg.control
        geo = cfg.geometry
        a = geo.flow_area
        rho, mu, lam, cp, h = self.fluid_props()
        u0 = self.velocities(rho)

        # time-step proposal: growth-limited, advection-limited, and kept
        # below half a plenum residence time so the explicit plenum mixing
        # stays well inside its stability margin
        dt = ctr.dt_max
        if self.dt_prev is None:
            dt = min(dt, ctr.dt_initial)
        else:
            dt = min(dt, ctr.dt_growth * self.dt_prev)
        umax = float(np.max(np.abs(u0)))
        if umax > 0.0:
            dt = min(dt, ctr.cfl_target * self._dz / umax)
        draw = float(np.sum(np.abs(self.mdot)))
        if self.boundary is not None:
            draw += abs(self.boundary.mdot_total)
        if draw > 0.0:
            m_pl = min(self.table.interpolate(p.temperature).density
                       * self.density_scale * p.volume
                       for p in (self.plenum_upper, self.plenum_lower))
            dt = min(dt, 0.5 * m_pl / draw)
        if dt < ctr.dt_min:
            raise SolverError(f"time step collapsed to {dt:.3e} s")

        f_pow = self._power_fraction()
        src = self._p_node * f_pow                       # W per fuel node

        t_wall, q_wall, h_film, corr, wall_iters = self._closure(
            rho, mu, lam, cp, u0)
        self.t_wall = t_wall
        self.q_wall = q_wall

        weight, fric, unsteady = self._momentum_coefficients(
            rho, mu, u0, corr)
        target = 0.0 if self.mode == "sealed" else self.boundary.mdot_total

        for _ in range(ctr.max_dt_retries):
            dp, mdot_new, resid = network_flow_split(
                self.mdot, weight, unsteady, fric, self._alpha, dt, target)
            cour = float(np.max(np.abs(mdot_new)[:, None] * dt
                                / (rho * a * self._dz)))
            if cour <= ctr.cfl_target * (1.0 + 1.0e-12):
                break
            dt = 0.95 * dt * ctr.cfl_target / cour
            if dt < ctr.dt_min:
                raise SolverError("time step collapsed during the advection "
                                  "limit retry")
        else:
            raise SolverError("advection limit retry did not settle")

        allowed = max(1.0e-9 * float(np.max(np.abs(mdot_new))),
                      _SPLIT_ABS_FLOOR)
        self.audit.max_split_ratio = max(self.audit.max_split_ratio,
                                         abs(resid) / allowed)
        self.audit.max_courant = max(self.audit.max_courant, cour)
        self.audit.wall_iterations_peak = max(self.audit.wall_iterations_peak,
                                              wall_iters)

        # ---- fluid energy update (channels) ----
        k = geo.axial_nodes
        h_up_low = self.table.interpolate(self.plenum_lower.temperature).enthalpy
        h_up_high = self.table.interpolate(self.plenum_upper.temperature).enthalpy
        h_up = h.copy()
        pos = mdot_new > 0.0
        neg = mdot_new < 0.0
        h_up[pos, 1:] = h[pos, :-1]
        h_up[pos, 0] = h_up_low
        h_up[neg, :-1] = h[neg, 1:]
        h_up[neg, k - 1] = h_up_high
        adv = np.abs(mdot_new)[:, None] * (h_up - h)     # W
        m_node = rho * self._v_node
        ha = np.zeros_like(h)
        ha[:, self._heated] = h_film * self._a_film      # W/K
        tw_full = np.zeros_like(h)
        tw_full[:, self._heated] = t_wall
        mcp = m_node * cp
        t_new = ((self.t_fluid + dt * (adv + ha * tw_full) / mcp)
                 / (1.0 + dt * ha / mcp))
        q_film = ha * (tw_full - t_new) * dt             # J into the fluid

        # ---- plena (explicit, exact enthalpy bookkeeping) ----
        bnd = self.boundary
        in_up = float(np.sum(mdot_new[pos] * h[pos, k - 1]))
        out_up = float(np.sum(-mdot_new[neg]))
        in_lo = float(np.sum(-mdot_new[neg] * h[neg, 0]))
        out_lo = float(np.sum(mdot_new[pos]))
        if bnd is not None and bnd.mdot_total != 0.0:
            h_in = self.table.interpolate(bnd.inlet_temperature).enthalpy
            if bnd.mdot_total < 0.0:
                in_up += -bnd.mdot_total * h_in
                out_lo += -bnd.mdot_total
                h_exit = self.table.interpolate(
                    self.plenum_lower.temperature).enthalpy
            else:
                in_lo += bnd.mdot_total * h_in
                out_up += bnd.mdot_total
                h_exit = self.table.interpolate(
                    self.plenum_upper.temperature).enthalpy
            self.audit.e_boundary_in += abs(bnd.mdot_total) * h_in * dt
            self.audit.e_boundary_out += abs(bnd.mdot_total) * h_exit * dt
        for pl, e_in, m_out in ((self.plenum_upper, in_up, out_up),
                                (self.plenum_lower, in_lo, out_lo)):
            s = self.table.interpolate(pl.temperature)
            m_pl = s.density * self.density_scale * pl.volume
            pl.temperature += (dt * (e_in - m_out * s.enthalpy)
                               / (m_pl * s.specific_heat))

        # ---- solid conduction, one implicit solve per heated level ----
        n = cfg.n_channels
        nh = self._heated.size
        fuel = cfg.fuel_material
        web = cfg.web_material
        c_fuel = fuel.density * self._v_fuel * fuel.specific_heat(self.t_fuel)
        c_web = web.density * self._v_web * web.specific_heat(self.t_web)
        sys_a = np.broadcast_to(self._cond, (nh, 2 * n, 2 * n)).copy()
        rng = np.arange(n)
        sys_a[:, rng, rng] += (c_fuel / dt).T
        sys_a[:, n + rng, n + rng] += (c_web / dt).T
        sys_b = np.empty((nh, 2 * n))
        sys_b[:, :n] = ((c_fuel / dt) * self.t_fuel + src).T
        q_sink = q_film[:, self._heated]
        sys_b[:, n:] = ((c_web / dt) * self.t_web - q_sink / dt).T
        sys_b += self._per_b[None, :]
        # explicit trailing vector axis: 2-D right-hand sides are ambiguous
        # for batched solves across numpy versions
        sol = np.linalg.solve(sys_a, sys_b[:, :, None])[:, :, 0]
        self.t_fuel = sol[:, :n].T.copy()
        self.t_web = sol[:, n:].T.copy()

        e_per = 0.0
        for i, g in cfg.periphery_links:
            gp = g * self._dz_heat
            e_per += gp * float(np.sum(self.t_web[i, :]
                                       - cfg.periphery_temperature)) * dt
        self.audit.e_periphery += e_per
        self.audit.e_source += float(np.sum(src)) * dt

        # ---- commit fluid state ----
        self.t_fluid = t_new
        self.mdot = mdot_new

        # ---- sealed-system pressure closure ----
        if self.mode == "sealed":
            p_ref = self.table.pressure
            for _ in range(2):
                rho_t, _, _, cp_now, _ = self.table.interpolate_arrays(
                    self.t_fluid)
                denom = float(np.sum(rho_t)) * self._v_node
                cp_pl = []
                for pl in (self.plenum_upper, self.plenum_lower):
                    s = self.table.interpolate(pl.temperature)
                    denom += s.density * pl.volume
                    cp_pl.append((s.density, s.specific_heat))
                p_new = self.sealed_mass * p_ref / denom
                d_p = p_new - self.pressure
                # compression heating at constant composition
                scale = p_new / p_ref
                self.t_fluid = self.t_fluid + d_p / (rho_t * scale * cp_now)
                for pl, (rho_pl, cp_p) in zip(
                        (self.plenum_upper, self.plenum_lower), cp_pl):
                    pl.temperature += d_p / (rho_pl * scale * cp_p)
                self.pressure = p_new
            # final exact inventory closure at the corrected temperatures
            rho_t, _, _, _, _ = self.table.interpolate_arrays(self.t_fluid)
            denom = float(np.sum(rho_t)) * self._v_node
            for pl in (self.plenum_upper, self.plenum_lower):
                denom += self.table.interpolate(pl.temperature).density \
                    * pl.volume
            self.pressure = self.sealed_mass * p_ref / denom
            drift = abs(self.total_gas_mass() - self.sealed_mass) \
                / self.sealed_mass
            self.audit.max_mass_drift = max(self.audit.max_mass_drift, drift)

        self.u_prev = u0
        self.dt_prev = dt
        self.time += dt
        self.step_count += 1
        return StepReport(time=self.time, dt=dt, pressure=self.pressure,
                          power_fraction=f_pow, dp=float(dp),
                          split_residual=resid, courant=cour,
                          wall_iterations=wall_iters)

    def seal_boundaries(self):
        """Switch to the sealed mode: trap the current inventory, drop the
        boundary, restart the audit trail."""
        if self.mode == "sealed":
            raise SolverError("network is already sealed")
        self.mode = "sealed"
        self.boundary = None
        self.time_sealed = self.time
        self.sealed_mass = self.total_gas_mass()
        self.reset_audits()


def step(state: NetworkState):
    return state.step()


def seal_boundaries(state: NetworkState):
    state.seal_boundaries()


# ---------------------------------------------------------------------------
# checkpointing


_CHECKPOINT_ARRAYS = ("t_fluid", "mdot", "t_wall", "t_fuel", "t_web",
                      "q_wall", "u_prev")
_AUDIT_FLOATS = ("e_source", "e_boundary_in", "e_boundary_out", "e_periphery",
                 "e_reference", "mass_reference", "max_courant",
                 "max_split_ratio", "max_mass_drift")


def _hex_array(arr):
    return {"shape": list(arr.shape),
            "data": [v.hex() for v in arr.ravel().tolist()]}


def _unhex_array(entry, expected_shape):
    shape = tuple(entry["shape"])
    if shape != tuple(expected_shape):
        raise ValueError(f"checkpoint array shape {shape} does not match "
                         f"state shape {tuple(expected_shape)}")
    flat = np.array([float.fromhex(s) for s in entry["data"]])
    return flat.reshape(shape)


def _hex_opt(value):
    return None if value is None else float(value).hex()


def _unhex_opt(value):
    return None if value is None else float.fromhex(value)


def save_checkpoint(state: NetworkState, path, config_digest=None):
    """Write the dynamic state to a JSON checkpoint.

    Floats are serialised in hexadecimal so a resumed run reproduces the
    original trajectory bit for bit.  The static configuration is not
    stored; config_digest lets the loader refuse a mismatched setup.
    """
    payload = {
        "format": CHECKPOINT_FORMAT,
        "config_digest": config_digest,
        "mode": state.mode,
        "time": state.time.hex(),
        "time_sealed": _hex_opt(state.time_sealed),
        "pressure": state.pressure.hex(),
        "sealed_mass": _hex_opt(state.sealed_mass),
        "dt_prev": _hex_opt(state.dt_prev),
        "step_count": state.step_count,
        "plenum_upper": _hex_opt(state.plenum_upper.temperature),
        "plenum_lower": _hex_opt(state.plenum_lower.temperature),
        "arrays": {name: _hex_array(getattr(state, name))
                   for name in _CHECKPOINT_ARRAYS},
        "audit": {name: float(getattr(state.audit, name)).hex()
                  for name in _AUDIT_FLOATS},
        "audit_wall_iterations_peak": state.audit.wall_iterations_peak,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")


def load_checkpoint(state: NetworkState, path, config_digest=None):
    """Restore the dynamic state written by save_checkpoint.

    The caller must build the state with the same configuration; array
    shapes are verified and, when both digests are present, the stored
    configuration digest must match.
    """
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not a recognised checkpoint: "
                         f"{payload.get('format')!r}")
    stored = payload.get("config_digest")
    if config_digest is not None and stored is not None \
            and stored != config_digest:
        raise ValueError("checkpoint was written for a different "
                         "configuration")
    mode = payload["mode"]
    if mode not in ("open", "sealed"):
        raise ValueError(f"bad mode in checkpoint: {mode!r}")
    if mode == "open" and state.boundary is None:
        raise ValueError("open-mode checkpoint needs a state built with a "
                         "boundary")
    for name in _CHECKPOINT_ARRAYS:
        setattr(state, name,
                _unhex_array(payload["arrays"][name],
                             getattr(state, name).shape))
    state.mode = mode
    if mode == "sealed":
        state.boundary = None
    state.time = float.fromhex(payload["time"])
    state.time_sealed = _unhex_opt(payload["time_sealed"])
    state.pressure = float.fromhex(payload["pressure"])
    state.sealed_mass = _unhex_opt(payload["sealed_mass"])
    state.dt_prev = _unhex_opt(payload["dt_prev"])
    state.step_count = int(payload["step_count"])
    state.plenum_upper.temperature = float.fromhex(payload["plenum_upper"])
    state.plenum_lower.temperature = float.fromhex(payload["plenum_lower"])
    audit = AuditTrail()
    for name in _AUDIT_FLOATS:
        setattr(audit, name, float.fromhex(payload["audit"][name]))
    audit.wall_iterations_peak = int(payload["audit_wall_iterations_peak"])
    state.audit = audit
    return state
