"""Mixed-convection impairment/enhancement of the turbulent Nusselt number.

The strength of buoyancy relative to forced convection is measured by

    Gr* = g*beta*q_wall*D**4 / (lambda*nu**2)
    Bo* = Gr* / (Re**3.425 * Pr**0.8)

and the ratio x = Nu/Nu_forced follows the implicit relation

    x = (1 -/+ C*Bo* * x**-2)**0.46

with the minus sign for buoyancy-aided flow and the plus sign for opposed
flow.  C defaults to the recalibrated 1.25e5; the original 2.5e5 remains
selectable.  The aided branch loses its real solution beyond a cap value of
Bo* (heat-transfer deterioration saturates there); the solver consumes
log-spaced lookup tables so the implicit solve happens once per run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RatioResult",
    "NuRatioTable",
    "grashof_star",
    "buoyancy_parameter",
    "nu_ratio_solve",
    "aided_solution_exists",
    "build_lookup_table",
    "lookup",
    "write_ratio_table",
]

DEFAULT_C = 1.25e5          # recalibrated correlation constant
ORIGINAL_C = 2.5e5
_EXPONENT = 0.46
_P = 1.0 / _EXPONENT        # implicit equation in the form x**p + a/x**2 = 1

# At the aided-branch existence boundary the double root is independent of
# both C and Bo*: x* = (1 + p/2)**(-1/p).
SATURATION_RATIO = (1.0 + _P / 2.0) ** (-1.0 / _P)


def grashof_star(g, beta, q_wall, diameter, conductivity, kinematic_viscosity):
    """Heat-flux Grashof number g*beta*q*D**4/(lambda*nu**2).

    q_wall is a magnitude (W/m2); orientation is tracked separately.
    """
    if g <= 0.0 or beta <= 0.0 or diameter <= 0.0:
        raise ValueError("g, beta and diameter must be positive")
    if conductivity <= 0.0 or kinematic_viscosity <= 0.0:
        raise ValueError("conductivity and kinematic viscosity must be positive")
    if q_wall < 0.0:
        raise ValueError(f"q_wall magnitude must be >= 0, got {q_wall!r}")
    return (g * beta * q_wall * diameter ** 4
            / (conductivity * kinematic_viscosity ** 2))


def buoyancy_parameter(gr_star, re, pr):
    """Bo* = Gr*/(Re**3.425 * Pr**0.8)."""
    if re <= 0.0 or pr <= 0.0:
        raise ValueError("Re and Pr must be positive")
    return gr_star / (re ** 3.425 * pr ** 0.8)


@dataclass(frozen=True)
class RatioResult:
    ratio: float
    saturated: bool = False


def _aided_residual(x, a):
    return x ** _P + a / (x * x) - 1.0


def _opposed_residual(x, a):
    return x ** _P - a / (x * x) - 1.0


def _aided_min_point(a):
    """Location of the residual minimum; roots straddle it when they exist."""
    return (2.0 * a / _P) ** (1.0 / (_P + 2.0))


def aided_solution_exists(bo_star, c=DEFAULT_C):
    """True when the aided implicit equation still has a real solution."""
    a = c * bo_star
    if a <= 0.0:
        return True
    return _aided_residual(_aided_min_point(a), a) <= 0.0


def _bisect(fn, lo, hi, tol=1.0e-15, max_iter=200):
    flo = fn(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0 or hi - lo < tol:
            return mid
        if (flo < 0.0) == (fm < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def nu_ratio_solve(bo_star, orientation, c=DEFAULT_C) -> RatioResult:
    """Solve the implicit mixed-convection ratio equation.

    orientation is "aided" or "opposed".  The aided branch returns the
    larger (deterioration) root; past the existence cap it returns the
    saturation ratio with the saturated flag set.  Bo* = 0 returns exactly 1.
    """
    if orientation not in ("aided", "opposed"):
        raise ValueError(f"bad orientation {orientation!r}")
    if bo_star < 0.0:
        raise ValueError(f"Bo* must be >= 0, got {bo_star!r}")
    if bo_star == 0.0:
        return RatioResult(1.0)
    a = c * bo_star

    if orientation == "opposed":
        x = _damped_fixed_point(a, sign=+1.0)
        if x is None or abs(_opposed_residual(x, a)) > 1.0e-12:
            hi = 1.0 + a
            x = _bisect(lambda y: _opposed_residual(y, a), 1.0,
                        max(hi, (2.0 * a) ** (1.0 / _P) + 1.0))
        return RatioResult(x)

    x_min = _aided_min_point(a)
    r_min = _aided_residual(x_min, a)
    if r_min > 0.0:
        return RatioResult(SATURATION_RATIO, saturated=True)
    if r_min == 0.0:
        return RatioResult(x_min)
    x = _damped_fixed_point(a, sign=-1.0)
    if (x is None or x < x_min
            or abs(_aided_residual(x, a)) > 1.0e-12):
        x = _bisect(lambda y: _aided_residual(y, a), x_min, 1.0)
    return RatioResult(x)


def _damped_fixed_point(a, sign, relax=0.5, tol=1.0e-13, max_iter=400):
    """Damped iteration x <- x + relax*((1 + sign*a/x**2)**0.46 - x)."""
    x = 1.0
    for _ in range(max_iter):
        arg = 1.0 + sign * a / (x * x)
        if arg <= 0.0:
            return None
        proposal = arg ** _EXPONENT
        step = proposal - x
        x += relax * step
        if abs(step) < tol:
            return x
    return None


@dataclass
class NuRatioTable:
    """Log-spaced Bo* lookup table for one orientation and C value."""

    orientation: str
    c_constant: float
    bo_grid: np.ndarray
    ratios: np.ndarray
    cap_point: float | None = None       # largest Bo* with an aided solution
    saturation_ratio: float | None = None
    clamp_events: int = field(default=0, compare=False)
    saturation_events: int = field(default=0, compare=False)

    def __post_init__(self):
        self.bo_grid = np.asarray(self.bo_grid, dtype=float)
        self.ratios = np.asarray(self.ratios, dtype=float)
        self._log_grid = np.log(self.bo_grid)
        if self.orientation == "aided":
            if np.any(self.ratios <= 0.0) or np.any(self.ratios > 1.0):
                raise ValueError("aided ratios must lie in (0, 1]")
            if np.any(np.diff(self.ratios) > 0.0):
                raise ValueError("aided ratios must be non-increasing")
        else:
            if np.any(self.ratios < 1.0):
                raise ValueError("opposed ratios must be >= 1")
            if np.any(np.diff(self.ratios) < 0.0):
                raise ValueError("opposed ratios must be non-decreasing")


def build_lookup_table(orientation, c=DEFAULT_C, bo_min=1.0e-9, bo_max=1.0e-3,
                       samples_per_decade=24) -> NuRatioTable:
    """Tabulate nu_ratio_solve on a log-spaced Bo* grid.

    For the aided orientation the existence cap is located by bisection (to
    1% in Bo*) and the grid is densified toward it, because the ratio curve
    has a square-root approach to the cap that a plain log grid would miss.
    """
    if not 0.0 < bo_min < bo_max:
        raise ValueError("need 0 < bo_min < bo_max")
    decades = math.log10(bo_max / bo_min)
    n = int(round(decades * samples_per_decade)) + 1
    grid = bo_min * 10.0 ** (np.arange(n) / samples_per_decade)
    grid[-1] = bo_max

    cap = None
    sat = None
    if orientation == "aided":
        exists = np.array([aided_solution_exists(b, c) for b in grid])
        if exists.all():
            cap = bo_max
        elif not exists[0]:
            raise ValueError(f"no aided solution even at bo_min={bo_min}")
        else:
            k = int(np.argmin(exists))     # first grid point past the cap
            lo, hi = grid[k - 1], grid[k]
            while hi / lo > 1.01:
                mid = math.sqrt(lo * hi)
                if aided_solution_exists(mid, c):
                    lo = mid
                else:
                    hi = mid
            cap = lo
            # Regular nodes up to half the cap, then a refined tail onto it.
            # The ratio approaches the cap like sqrt(cap - Bo*), so
            # quadratically spaced tail nodes hold the interpolation error
            # roughly uniform over the whole curved region.
            keep = grid < cap * 0.5
            if not np.any(keep):
                keep = np.zeros(len(grid), dtype=bool)
                keep[0] = True
            head = grid[keep]
            gap = cap - head[-1]
            j = np.arange(95, 0, -1)
            tail = cap - gap * (j / 96.0) ** 2
            grid = np.concatenate([head, tail, [cap]])
        sat = SATURATION_RATIO

    ratios = np.empty_like(grid)
    for i, b in enumerate(grid):
        res = nu_ratio_solve(b, orientation, c)
        if res.saturated:
            raise RuntimeError(f"table node {b} unexpectedly beyond the cap")
        ratios[i] = res.ratio
    return NuRatioTable(orientation, c, grid, ratios, cap_point=cap,
                        saturation_ratio=sat)


def lookup(table: NuRatioTable, bo_star):
    """Log-linear interpolation of the tabulated ratio.

    Clamps below the grid to the small-Bo* end value; aided queries beyond
    the cap return the saturation ratio and count a saturation event.
    """
    if bo_star < table.bo_grid[0]:
        table.clamp_events += 1
        return float(table.ratios[0])
    if table.orientation == "aided" and table.cap_point is not None \
            and bo_star > table.cap_point:
        table.saturation_events += 1
        return float(table.saturation_ratio)
    if bo_star > table.bo_grid[-1]:
        table.clamp_events += 1
        return float(table.ratios[-1])
    i = min(max(int(np.searchsorted(table.bo_grid, bo_star)) - 1, 0),
            len(table.bo_grid) - 2)
    lg = table._log_grid
    w = (math.log(bo_star) - lg[i]) / (lg[i + 1] - lg[i])
    return float(table.ratios[i] + w * (table.ratios[i + 1] - table.ratios[i]))


def lookup_arrays(table: NuRatioTable, bo_star):
    """Vectorised lookup with the same clamp/saturation semantics."""
    bo = np.asarray(bo_star, dtype=float)
    low = bo < table.bo_grid[0]
    if table.orientation == "aided" and table.cap_point is not None:
        high = bo > table.cap_point
    else:
        high = bo > table.bo_grid[-1]
    table.clamp_events += int(np.count_nonzero(low))
    inner = ~(low | high)
    out = np.empty_like(bo)
    out[low] = table.ratios[0]
    if table.orientation == "aided" and table.cap_point is not None:
        table.saturation_events += int(np.count_nonzero(high))
        out[high] = table.saturation_ratio
    else:
        table.clamp_events += int(np.count_nonzero(high))
        out[high] = table.ratios[-1]
    if np.any(inner):
        b = bo[inner]
        i = np.searchsorted(table.bo_grid, b) - 1
        i = np.clip(i, 0, len(table.bo_grid) - 2)
        lg = table._log_grid
        w = (np.log(b) - lg[i]) / (lg[i + 1] - lg[i])
        out[inner] = table.ratios[i] + w * (table.ratios[i + 1]
                                            - table.ratios[i])
    return out


def write_ratio_table(table: NuRatioTable, path):
    """Dump a table as delimited text with provenance header comments."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# orientation={table.orientation}\n")
        f.write(f"# C={table.c_constant:.17g}\n")
        if table.cap_point is not None:
            f.write(f"# cap_point={table.cap_point:.17g}\n")
            f.write(f"# saturation_ratio={table.saturation_ratio:.17g}\n")
        f.write("Bo*,ratio\n")
        for b, r in zip(table.bo_grid, table.ratios):
            f.write(f"{b:.17g},{r:.17g}\n")
