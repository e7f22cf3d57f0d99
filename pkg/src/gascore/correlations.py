"""Friction and convective heat-transfer closures.

Friction factors use the Darcy convention throughout (laminar c_f = 64/Re).
The turbulent steady value comes from the smooth-pipe transcendental law

    1/sqrt(c_f) = -2*log10(2.51 / (Re*sqrt(c_f)))

solved to tight residual, with a log-linear blend across the transition band
Re_lam..Re_turb.  An explicit turbulent estimate

    c_f0 = 1 / (1.82*log10(Re/8))**2

seeds the root solve and anchors the heat-transfer chain: a multiplicative
wall-to-bulk property correction (density ratio to the m power, viscosity
ratio to the n power), then the friction-based Nusselt correlation

    Nu = Re*Pr*(c_f/8) / (1 + 900/Re + 12.7*sqrt(c_f/8)*(Pr**(2/3) - 1)).

Unsteady friction adds a transient term proportional to the local
acceleration, c_f = c_fs + k3*D*(dU/dt)/(U*|U|), with k3 = sqrt(C*)/2 and a
Reynolds-dependent C*.  The convective part of the acceleration is omitted
by design: channel-integrated momentum sees only the local term.

An alternative Nusselt form for strongly property-variable (supercritical)
fluids is provided at correlation level only:

    Nu = 0.0183*Re**0.82*Pr**0.5*(rho_w/rho_b)**0.3*(cp_bar/cp_b)**n

with cp_bar = (h_w - h_b)/(T_w - T_b) and a piecewise exponent n keyed to
the pseudo-critical temperature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .properties import FluidStateSample

__all__ = [
    "BulkState",
    "WallState",
    "CorrelationConfig",
    "FrictionResult",
    "reynolds",
    "prandtl",
    "steady_friction",
    "colebrook_residual",
    "brunone_k3",
    "brunone_friction",
    "petukhov_cf0",
    "property_corrected_cf",
    "petukhov_nu",
    "supercritical_exponent_n",
    "mean_specific_heat",
    "variable_property_nu",
]

LAMINAR_NU = 4.36            # fully developed laminar, uniform heat flux
_BRUNONE_C_LAMINAR = 0.00476


def reynolds(rho, u, d, mu):
    """Bulk Reynolds number rho*|u|*d/mu."""
    return rho * abs(u) * d / mu


def prandtl(mu, cp, lam):
    """Prandtl number mu*cp/lam."""
    return mu * cp / lam


@dataclass(frozen=True)
class BulkState:
    """Bulk fluid state at one channel node.

    Reynolds and Prandtl numbers are derived from the stored primitives on
    access, so they can never drift out of step with them.
    """

    temperature: float    # K
    density: float        # kg/m3
    viscosity: float      # Pa*s
    conductivity: float   # W/(m*K)
    specific_heat: float  # J/(kg*K)
    enthalpy: float       # J/kg
    velocity: float       # m/s, signed (positive up)
    diameter: float       # m

    @classmethod
    def from_sample(cls, sample: FluidStateSample, velocity, diameter):
        return cls(sample.temperature, sample.density, sample.viscosity,
                   sample.conductivity, sample.specific_heat,
                   sample.enthalpy, velocity, diameter)

    @property
    def reynolds(self):
        return reynolds(self.density, self.velocity, self.diameter,
                        self.viscosity)

    @property
    def prandtl(self):
        return prandtl(self.viscosity, self.specific_heat,
                       self.conductivity)


@dataclass(frozen=True)
class WallState:
    """Fluid properties evaluated at the wall temperature."""

    temperature: float    # K
    density: float        # kg/m3
    viscosity: float      # Pa*s
    enthalpy: float       # J/kg

    @classmethod
    def from_sample(cls, sample: FluidStateSample):
        return cls(sample.temperature, sample.density, sample.viscosity,
                   sample.enthalpy)


@dataclass(frozen=True)
class CorrelationConfig:
    """Switches and constants for the closure chain.

    density_exponent/viscosity_exponent are the wall-correction powers
    (m, n).  The (0.4, 1.0) default suits gas heating; (0.33, 0.2) is the
    documented alternative pair.  k3_mode selects the analytic
    Reynolds-dependent k3 or a constant override.
    """

    density_exponent: float = 0.4
    viscosity_exponent: float = 1.0
    re_laminar: float = 2300.0
    re_turbulent: float = 4000.0
    brunone_enabled: bool = False
    k3_mode: str = "analytic"          # "analytic" | "constant"
    k3_constant: float = 0.0225
    velocity_floor: float = 1.0e-6     # m/s, transient-term division guard
    property_corrections: bool = True
    petukhov_friction_base: bool = False  # momentum c_f from the explicit law
    pseudo_critical_t: float | None = None  # K, supercritical Nu only

    def __post_init__(self):
        if not 0.0 < self.re_laminar < self.re_turbulent:
            raise ValueError("need 0 < re_laminar < re_turbulent")
        if self.k3_mode not in ("analytic", "constant"):
            raise ValueError(f"bad k3_mode {self.k3_mode!r}")


ALTERNATIVE_EXPONENTS = (0.33, 0.2)   # (m, n) alternative correction pair


@dataclass(frozen=True)
class FrictionResult:
    """Split friction factor: c_f is exactly steady_part + transient_part."""

    steady_part: float
    transient_part: float
    k3_used: float
    velocity_floored: bool = False

    @property
    def c_f(self):
        return self.steady_part + self.transient_part


def colebrook_residual(re, cf):
    """Residual of the smooth-pipe law in the 1/sqrt(c_f) form."""
    inv_sqrt = 1.0 / np.sqrt(cf)
    return inv_sqrt + 2.0 * np.log10(2.51 * inv_sqrt / re)


def _colebrook_arrays(re):
    """Solve the smooth-pipe transcendental law for c_f, elementwise.

    Safeguarded bisection in y = 1/sqrt(c_f), seeded by the explicit
    turbulent estimate; the residual is monotone increasing in y, so the
    bracket is safe once the endpoints straddle.
    """
    re = np.asarray(re, dtype=float)
    y0 = 1.0 / np.sqrt(petukhov_cf0(re))

    def resid(y):
        return y + 2.0 * np.log10(2.51 * y / re)

    lo = 0.5 * y0
    hi = 1.5 * y0
    for _ in range(60):
        bad = resid(lo) > 0.0
        if not np.any(bad):
            break
        lo = np.where(bad, 0.5 * lo, lo)
    for _ in range(60):
        bad = resid(hi) < 0.0
        if not np.any(bad):
            break
        hi = np.where(bad, 2.0 * hi, hi)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        up = resid(mid) > 0.0
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    y = 0.5 * (lo + hi)
    return 1.0 / (y * y)


def steady_friction(re, cfg: CorrelationConfig = CorrelationConfig()):
    """Quasi-steady Darcy friction factor, elementwise over re.

    Laminar 64/Re up to re_laminar, smooth-pipe turbulent solution from
    re_turbulent, log-linear blend in between.
    """
    re_arr = np.asarray(re, dtype=float)
    if np.any(re_arr <= 0.0):
        raise ValueError(f"Reynolds number must be positive, got {re!r}")
    out = np.empty_like(re_arr)
    lam = re_arr <= cfg.re_laminar
    turb = re_arr >= cfg.re_turbulent
    mid = ~(lam | turb)
    out[lam] = 64.0 / re_arr[lam]
    if np.any(turb):
        out[turb] = _colebrook_arrays(re_arr[turb])
    if np.any(mid):
        c_lam = 64.0 / cfg.re_laminar
        c_turb = float(_colebrook_arrays(cfg.re_turbulent))
        w = (np.log(re_arr[mid]) - math.log(cfg.re_laminar)) / (
            math.log(cfg.re_turbulent) - math.log(cfg.re_laminar))
        out[mid] = np.exp((1.0 - w) * math.log(c_lam)
                          + w * math.log(c_turb))
    if out.ndim == 0:
        return float(out)
    return out


def brunone_k3(re, cfg: CorrelationConfig = CorrelationConfig()):
    """Transient-friction coefficient k3 = sqrt(C*)/2, elementwise over re.

    C* = 0.00476 on the laminar branch; above re_laminar (transition band
    included) C* = 12.86/Re**kappa with kappa = log10(15.29/Re**0.0567).
    """
    re_arr = np.asarray(re, dtype=float)
    if cfg.k3_mode == "constant":
        k3 = np.full_like(re_arr, cfg.k3_constant)
        return float(k3) if k3.ndim == 0 else k3
    if np.any(re_arr <= 0.0):
        raise ValueError(f"Reynolds number must be positive, got {re!r}")
    kappa = np.log10(15.29 / re_arr ** 0.0567)
    c_star = np.where(re_arr <= cfg.re_laminar, _BRUNONE_C_LAMINAR,
                      12.86 / re_arr ** kappa)
    k3 = np.sqrt(c_star) / 2.0
    if k3.ndim == 0:
        return float(k3)
    return k3


def brunone_friction(c_fs, k3, diameter, velocity, accel,
                     velocity_floor=1.0e-6) -> FrictionResult:
    """Unsteady friction c_f = c_fs + k3*D*(dU/dt)/(U*|U|).

    Below the velocity floor the transient term is forced to zero (division
    guard) and flagged on the result.
    """
    if abs(velocity) <= velocity_floor:
        return FrictionResult(c_fs, 0.0, k3, velocity_floored=True)
    transient = k3 * diameter * accel / (velocity * abs(velocity))
    return FrictionResult(c_fs, transient, k3)


def petukhov_cf0(re):
    """Explicit smooth-pipe turbulent friction, 1/(1.82*log10(Re/8))**2."""
    re_arr = np.asarray(re, dtype=float)
    if np.any(re_arr <= 8.0):
        raise ValueError(f"explicit turbulent law needs Re > 8, got {re!r}")
    out = 1.0 / (1.82 * np.log10(re_arr / 8.0)) ** 2
    if out.ndim == 0:
        return float(out)
    return out


def property_corrected_cf(cf0, bulk: BulkState, wall: WallState,
                          cfg: CorrelationConfig = CorrelationConfig()):
    """Wall-to-bulk property correction of a friction factor.

    c_f = cf0 * (rho_w/rho_b)**m * (mu_w/mu_b)**n.  Unit ratios return cf0
    bit-for-bit.
    """
    if wall.density == bulk.density and wall.viscosity == bulk.viscosity:
        return cf0
    rho_ratio = wall.density / bulk.density
    mu_ratio = wall.viscosity / bulk.viscosity
    return (cf0 * rho_ratio ** cfg.density_exponent
            * mu_ratio ** cfg.viscosity_exponent)


def petukhov_nu(re, pr, cf):
    """Friction-based turbulent Nusselt correlation, elementwise."""
    re_arr = np.asarray(re, dtype=float)
    eighth = np.asarray(cf, dtype=float) / 8.0
    pr_arr = np.asarray(pr, dtype=float)
    denom = (1.0 + 900.0 / re_arr
             + 12.7 * np.sqrt(eighth) * (pr_arr ** (2.0 / 3.0) - 1.0))
    if np.any(denom <= 0.0):
        raise ValueError(f"Nusselt correlation denominator {denom} <= 0 "
                         f"at Re={re}, Pr={pr}, cf={cf}")
    out = re_arr * pr_arr * eighth / denom
    if out.ndim == 0:
        return float(out)
    return out


def supercritical_exponent_n(t_b, t_w, t_pc):
    """Piecewise exponent for the supercritical specific-heat ratio.

    Branches are keyed to the pseudo-critical temperature t_pc and are
    continuous at the branch joins except the documented drop to zero at
    t_b = 1.2*t_pc.
    """
    if t_pc <= 0.0:
        raise ValueError("pseudo-critical temperature must be positive")
    if t_w < t_b:
        raise ValueError(f"wall temperature {t_w} below bulk {t_b}")
    rb = t_b / t_pc
    rw = t_w / t_pc
    if t_b <= t_pc:
        if t_w <= t_pc:
            return 0.4
        return 0.4 + 0.2 * (rw - 1.0)
    if rb <= 1.2:
        return (0.4 + 0.2 * (rw - 1.0)) * (1.0 - 5.0 * (rb - 1.0))
    return 0.4


def mean_specific_heat(bulk: BulkState, wall: WallState):
    """Integrated specific heat (h_w - h_b)/(T_w - T_b); cp_b in the limit."""
    dt = wall.temperature - bulk.temperature
    if dt == 0.0:
        return bulk.specific_heat
    return (wall.enthalpy - bulk.enthalpy) / dt


def variable_property_nu(bulk: BulkState, wall: WallState, t_pc):
    """Supercritical-style variable-property Nusselt correlation."""
    n = supercritical_exponent_n(bulk.temperature, wall.temperature, t_pc)
    cp_ratio = mean_specific_heat(bulk, wall) / bulk.specific_heat
    rho_ratio = wall.density / bulk.density
    return (0.0183 * bulk.reynolds ** 0.82 * bulk.prandtl ** 0.5
            * rho_ratio ** 0.3 * cp_ratio ** n)
