"""Fluid and solid property models.

Fluid properties are tabulated once per run at a fixed system pressure and
interpolated in temperature only.  The bundled gas model is helium treated as
an ideal gas with power-law transport properties, which is adequate for the
7 MPa, 500-1500 K operating envelope of a gas-cooled core.  User-supplied
tables with the same column layout can replace the bundled model.

Solid materials (graphite, fuel compact) carry fourth-order polynomial fits
for conductivity and specific heat plus a constant density.  Polynomials are
only trusted inside their stated validity range; evaluation outside raises.

All quantities are SI: K, kg/m3, Pa*s, W/(m*K), J/(kg*K), J/kg.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FluidStateSample",
    "FluidPropertyTable",
    "SolidMaterialModel",
    "PropertyRangeError",
    "build_helium_table",
    "load_property_table",
    "write_property_table",
    "solid_property",
]

GAS_CONSTANT = 8.314462        # J/(mol*K)
HELIUM_MOLAR_MASS = 0.004002   # kg/mol
HELIUM_CP = 5193.0             # J/(kg*K), constant for monatomic helium

# Power-law transport fits for helium, valid well beyond 500-1500 K.
_MU_COEFF = 3.674e-7           # Pa*s / K^0.7
_MU_EXP = 0.7
_LAMBDA_COEFF = 2.682e-3       # W/(m*K) / K^0.71
_LAMBDA_EXP = 0.71

TABLE_HEADER = "T,rho,mu,lambda,cp,h"


class PropertyRangeError(ValueError):
    """A property model was evaluated outside its validity range."""

    def __init__(self, message: str, value: float):
        super().__init__(message)
        self.value = value


@dataclass(frozen=True)
class FluidStateSample:
    """Fluid properties at a single temperature."""

    temperature: float    # K
    density: float        # kg/m3
    viscosity: float      # Pa*s
    conductivity: float   # W/(m*K)
    specific_heat: float  # J/(kg*K)
    enthalpy: float       # J/kg

    def __post_init__(self):
        for name in ("temperature", "density", "viscosity", "conductivity",
                     "specific_heat", "enthalpy"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got "
                                 f"{getattr(self, name)!r}")


class FluidPropertyTable:
    """Uniformly spaced temperature table of fluid properties.

    The table is immutable after construction apart from ``clamp_events``,
    a diagnostics counter incremented whenever an interpolation query falls
    outside the tabulated range and is clamped to the nearest endpoint.
    """

    def __init__(self, pressure, temperatures, density, viscosity,
                 conductivity, specific_heat, enthalpy):
        t = np.asarray(temperatures, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("need at least two temperature samples")
        dt = np.diff(t)
        if np.any(dt <= 0.0):
            raise ValueError("temperature grid must be strictly increasing")
        spacing = dt[0]
        if np.max(np.abs(dt - spacing)) > 1e-9 * spacing:
            raise ValueError("temperature grid must be uniformly spaced")
        self.pressure = float(pressure)                    # Pa
        self.temperatures = t
        self.spacing = spacing                             # K
        self.density = np.asarray(density, dtype=float)
        self.viscosity = np.asarray(viscosity, dtype=float)
        self.conductivity = np.asarray(conductivity, dtype=float)
        self.specific_heat = np.asarray(specific_heat, dtype=float)
        self.enthalpy = np.asarray(enthalpy, dtype=float)
        for name in ("density", "viscosity", "conductivity", "specific_heat"):
            arr = getattr(self, name)
            if arr.shape != t.shape:
                raise ValueError(f"{name} shape {arr.shape} does not match "
                                 f"temperature grid {t.shape}")
            if np.any(arr <= 0.0):
                raise ValueError(f"{name} must be positive everywhere")
        if self.enthalpy.shape != t.shape:
            raise ValueError("enthalpy shape does not match temperature grid")
        if np.any(self.enthalpy <= 0.0):
            raise ValueError("enthalpy must be positive everywhere")
        if np.any(np.diff(self.enthalpy) <= 0.0):
            raise ValueError("enthalpy must be strictly increasing")
        if np.any(np.diff(self.density) > 0.0):
            raise ValueError("density must be non-increasing in temperature")
        for arr in (self.temperatures, self.density, self.viscosity,
                    self.conductivity, self.specific_heat, self.enthalpy):
            arr.setflags(write=False)
        self.clamp_events = 0

    @property
    def t_min(self):
        return float(self.temperatures[0])

    @property
    def t_max(self):
        return float(self.temperatures[-1])

    def __len__(self):
        return self.temperatures.size

    def _locate(self, t):
        """Return (index, fraction, clamp count) for array-valued t."""
        t = np.asarray(t, dtype=float)
        below = t < self.t_min
        above = t > self.t_max
        n_clamped = int(np.count_nonzero(below) + np.count_nonzero(above))
        tc = np.clip(t, self.t_min, self.t_max)
        pos = (tc - self.t_min) / self.spacing
        idx = np.minimum(pos.astype(int), len(self) - 2)
        frac = pos - idx
        return idx, frac, n_clamped

    def interpolate(self, t: float) -> FluidStateSample:
        """Piecewise-linear interpolation of every field at temperature t.

        Out-of-range queries clamp to the nearest endpoint and bump the
        ``clamp_events`` counter.
        """
        idx, frac, n_clamped = self._locate(float(t))
        self.clamp_events += n_clamped
        i = int(idx)
        w = float(frac)

        def lerp(arr):
            return float(arr[i] + w * (arr[i + 1] - arr[i]))

        return FluidStateSample(
            temperature=lerp(self.temperatures),
            density=lerp(self.density),
            viscosity=lerp(self.viscosity),
            conductivity=lerp(self.conductivity),
            specific_heat=lerp(self.specific_heat),
            enthalpy=lerp(self.enthalpy),
        )

    def interpolate_arrays(self, t):
        """Vectorised interpolation: returns (rho, mu, lam, cp, h) arrays."""
        idx, frac, n_clamped = self._locate(t)
        self.clamp_events += n_clamped

        def lerp(arr):
            return arr[idx] + frac * (arr[idx + 1] - arr[idx])

        return (lerp(self.density), lerp(self.viscosity),
                lerp(self.conductivity), lerp(self.specific_heat),
                lerp(self.enthalpy))


def _helium_fields(pressure, t):
    rho = pressure * HELIUM_MOLAR_MASS / (GAS_CONSTANT * t)
    mu = _MU_COEFF * t ** _MU_EXP
    lam = _LAMBDA_COEFF * t ** _LAMBDA_EXP
    cp = np.full_like(t, HELIUM_CP)
    h = HELIUM_CP * t   # constant cp, h(0 K) = 0 reference
    return rho, mu, lam, cp, h


def build_helium_table(pressure=7.0e6, t_min=500.0, t_max=1500.0,
                       spacing=1.0) -> FluidPropertyTable:
    """Tabulate the bundled helium model on a uniform temperature grid.

    Grid endpoints are inclusive, so (500, 1500, 1.0) gives 1001 samples.
    """
    if spacing <= 0.0:
        raise ValueError(f"spacing must be positive, got {spacing!r}")
    if t_min >= t_max:
        raise ValueError(f"t_min {t_min!r} must be below t_max {t_max!r}")
    if t_min <= 0.0:
        raise ValueError("t_min must be positive")
    n = int(round((t_max - t_min) / spacing)) + 1
    t = t_min + spacing * np.arange(n)
    rho, mu, lam, cp, h = _helium_fields(float(pressure), t)
    return FluidPropertyTable(pressure, t, rho, mu, lam, cp, h)


def load_property_table(path, pressure) -> FluidPropertyTable:
    """Read a property table from delimited text with header T,rho,mu,lambda,cp,h.

    The temperature column must be strictly increasing and uniformly spaced;
    anything else is rejected.
    """
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
        if header.replace(" ", "") != TABLE_HEADER:
            raise ValueError(f"bad property table header {header!r}, "
                             f"expected {TABLE_HEADER!r}")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    if data.shape[1] != 6:
        raise ValueError(f"expected 6 columns, got {data.shape[1]}")
    t, rho, mu, lam, cp, h = data.T
    return FluidPropertyTable(pressure, t, rho, mu, lam, cp, h)


def write_property_table(table: FluidPropertyTable, path):
    """Write a table in the same format load_property_table reads."""
    cols = np.column_stack([table.temperatures, table.density,
                            table.viscosity, table.conductivity,
                            table.specific_heat, table.enthalpy])
    with open(path, "w", encoding="utf-8") as f:
        f.write(TABLE_HEADER + "\n")
        for row in cols:
            f.write(",".join(f"{v:.17g}" for v in row) + "\n")


@dataclass(frozen=True)
class SolidMaterialModel:
    """Polynomial solid property model.

    ``conductivity_coeffs`` and ``specific_heat_coeffs`` are fourth-order
    polynomial coefficients in ascending powers of T (5 values each).
    """

    name: str                               # e.g. "graphite", "fuel_compact"
    conductivity_coeffs: tuple              # W/(m*K), c0..c4 in T^0..T^4
    specific_heat_coeffs: tuple             # J/(kg*K), c0..c4
    density: float                          # kg/m3, constant
    t_valid: tuple = (300.0, 2000.0)        # K, inclusive validity range

    def __post_init__(self):
        object.__setattr__(self, "conductivity_coeffs",
                           tuple(float(c) for c in self.conductivity_coeffs))
        object.__setattr__(self, "specific_heat_coeffs",
                           tuple(float(c) for c in self.specific_heat_coeffs))
        if len(self.conductivity_coeffs) != 5:
            raise ValueError("conductivity_coeffs needs 5 coefficients")
        if len(self.specific_heat_coeffs) != 5:
            raise ValueError("specific_heat_coeffs needs 5 coefficients")
        if not self.density > 0.0:
            raise ValueError("density must be positive")
        lo, hi = self.t_valid
        if not lo < hi:
            raise ValueError("t_valid must be an increasing (lo, hi) pair")

    def _check_range(self, t):
        lo, hi = self.t_valid
        tmin = float(np.min(t))
        tmax = float(np.max(t))
        if tmin < lo or tmax > hi:
            bad = tmin if tmin < lo else tmax
            raise PropertyRangeError(
                f"{self.name}: temperature {bad} K outside validity "
                f"range [{lo}, {hi}] K", bad)

    def conductivity(self, t):
        """k(T) by Horner evaluation, W/(m*K)."""
        self._check_range(t)
        return _horner(self.conductivity_coeffs, t)

    def specific_heat(self, t):
        """cp(T) by Horner evaluation, J/(kg*K)."""
        self._check_range(t)
        return _horner(self.specific_heat_coeffs, t)

    def internal_energy(self, t):
        """Specific internal energy relative to 0 K: integral of cp dT.

        Exact antiderivative of the cp polynomial; used by the energy audit
        so that stored energy is consistent with the cp model.
        """
        self._check_range(t)
        c = self.specific_heat_coeffs
        anti = tuple(c[k] / (k + 1) for k in range(5))
        return _horner(anti, t) * t


def _horner(coeffs, t):
    """Evaluate sum(coeffs[k] * t**k) by Horner's rule (scalar or array)."""
    acc = np.zeros_like(np.asarray(t, dtype=float))
    for c in reversed(coeffs):
        acc = acc * t + c
    if np.ndim(t) == 0:
        return float(acc)
    return acc


def solid_property(model: SolidMaterialModel, which: str, t):
    """Dispatch helper: which is 'conductivity' or 'specific_heat'."""
    if which == "conductivity":
        return model.conductivity(t)
    if which == "specific_heat":
        return model.specific_heat(t)
    raise ValueError(f"unknown solid property {which!r}")
