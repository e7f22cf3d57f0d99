"""Buoyancy-influence solutions and lookup tables.

The defining equation is solved independently here by bisection and the
package values are held to it.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gascore.buoyancy import (DEFAULT_C, SATURATION_RATIO, NuRatioTable,
                              aided_solution_exists, build_lookup_table,
                              buoyancy_parameter, grashof_star, lookup,
                              lookup_arrays, nu_ratio_solve,
                              write_ratio_table)

P_EXP = 1.0 / 0.46


def bisect_aided(bo, c):
    """Largest root of x**P + a/x**2 = 1, found without the package."""
    a = c * bo
    x_min = (2.0 * a / P_EXP) ** (1.0 / (P_EXP + 2.0))
    lo, hi = x_min, 1.0

    def f(x):
        return x ** P_EXP + a / x ** 2 - 1.0

    if f(lo) > 0.0:
        raise AssertionError("no aided solution at this Bo*")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def bisect_opposed(bo, c):
    a = c * bo
    lo, hi = 1.0, 10.0

    def f(x):
        return x ** P_EXP - a / x ** 2 - 1.0

    while f(hi) < 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def analytic_cap(c):
    # tangency: the local minimum of the aided residual touches zero,
    # which happens exactly at the saturation ratio
    y = SATURATION_RATIO
    return P_EXP * y ** (P_EXP + 2.0) / (2.0 * c)


def test_saturation_ratio_closed_form():
    assert SATURATION_RATIO == pytest.approx(
        (1.0 + P_EXP / 2.0) ** (-1.0 / P_EXP), rel=1.0e-15)
    assert SATURATION_RATIO == pytest.approx(0.712892154698673,
                                             rel=1.0e-14)


def test_grashof_star_formula():
    g, beta, q, d, lam, nu_kin = 9.81, 1.0 / 763.0, 29.1e3, 0.01588, \
        0.20, 8.9e-6
    expected = g * beta * q * d ** 4 / (lam * nu_kin ** 2)
    got = grashof_star(g, beta, q, d, lam, nu_kin)
    assert got == pytest.approx(expected, rel=1.0e-14)
    assert got == pytest.approx(1501859.9696307085, rel=1.0e-12)


def test_buoyancy_parameter_formula_and_guards():
    assert buoyancy_parameter(1.0e6, 5134.0, 0.66) == pytest.approx(
        1.0e6 / (5134.0 ** 3.425 * 0.66 ** 0.8), rel=1.0e-14)
    with pytest.raises(ValueError):
        buoyancy_parameter(1.0e6, 0.0, 0.66)
    with pytest.raises(ValueError):
        buoyancy_parameter(1.0e6, 5134.0, -1.0)


def test_zero_parameter_is_exactly_unity():
    for orientation in ("aided", "opposed"):
        res = nu_ratio_solve(0.0, orientation)
        assert res.ratio == 1.0
        assert not res.saturated


def test_aided_solution_frozen_and_bisection():
    res = nu_ratio_solve(1.0e-6, "aided", 1.25e5)
    assert not res.saturated
    assert res.ratio == pytest.approx(0.9308428389774939, rel=1.0e-12)
    assert res.ratio == pytest.approx(bisect_aided(1.0e-6, 1.25e5),
                                      rel=1.0e-10)


def test_opposed_solution_frozen_and_bisection():
    res = nu_ratio_solve(1.0e-6, "opposed", 1.25e5)
    assert res.ratio == pytest.approx(1.0505891771592413, rel=1.0e-12)
    assert res.ratio == pytest.approx(bisect_opposed(1.0e-6, 1.25e5),
                                      rel=1.0e-10)


def test_aided_saturates_past_tangency():
    cap = analytic_cap(DEFAULT_C)
    res = nu_ratio_solve(cap * 1.05, "aided", DEFAULT_C)
    assert res.saturated
    assert res.ratio == SATURATION_RATIO
    assert aided_solution_exists(cap * 0.95, DEFAULT_C)
    assert not aided_solution_exists(cap * 1.05, DEFAULT_C)


@pytest.fixture(scope="module")
def aided_table():
    return build_lookup_table("aided")


@pytest.fixture(scope="module")
def opposed_table():
    return build_lookup_table("opposed")


def test_every_entry_satisfies_equation(aided_table, opposed_table):
    for table, sign in ((aided_table, 1.0), (opposed_table, -1.0)):
        a = table.c_constant * table.bo_grid
        resid = table.ratios ** P_EXP + sign * a / table.ratios ** 2 - 1.0
        assert float(np.max(np.abs(resid))) < 1.0e-10


def test_cap_point_near_analytic_tangency(aided_table):
    cap = analytic_cap(DEFAULT_C)
    assert aided_table.cap_point == pytest.approx(cap, rel=0.01)
    assert aided_table.cap_point <= cap
    # the last tabulated ratio sits just above the saturation floor
    assert SATURATION_RATIO < aided_table.ratios[-1] < 0.8


def test_opposed_table_has_no_cap(opposed_table):
    assert opposed_table.cap_point is None


def test_lookup_exact_on_grid(aided_table):
    for i in (0, 7, aided_table.bo_grid.size - 1):
        bo = float(aided_table.bo_grid[i])
        assert lookup(aided_table, bo) == aided_table.ratios[i]


def test_lookup_log_linear_between_nodes(opposed_table):
    g, r = opposed_table.bo_grid, opposed_table.ratios
    i = 40
    bo = math.sqrt(g[i] * g[i + 1])   # log midpoint
    w = (math.log(bo) - math.log(g[i])) / (math.log(g[i + 1])
                                           - math.log(g[i]))
    expected = r[i] + w * (r[i + 1] - r[i])
    assert lookup(opposed_table, bo) == pytest.approx(expected,
                                                      rel=1.0e-12)


def test_lookup_below_grid_clamps_and_counts(aided_table):
    before = aided_table.clamp_events
    val = lookup(aided_table, 1.0e-12)
    assert val == aided_table.ratios[0]
    assert aided_table.clamp_events == before + 1


def test_lookup_beyond_cap_saturates(aided_table):
    before = aided_table.saturation_events
    val = lookup(aided_table, 1.0e-2)
    assert val == SATURATION_RATIO
    assert aided_table.saturation_events == before + 1


def test_lookup_arrays_matches_scalar(aided_table, opposed_table):
    bo = np.array([1.0e-10, 3.3e-8, 1.0e-6, 2.0e-6, 5.0e-4, 1.0e-2])
    for table in (aided_table, opposed_table):
        vec = lookup_arrays(table, bo)
        for i, b in enumerate(bo):
            assert vec[i] == lookup(table, float(b))


@settings(derandomize=True, max_examples=50, deadline=None)
@given(st.floats(min_value=1.0e-9, max_value=1.0e-3))
def test_lookup_stays_within_table_range(bo):
    table = build_lookup_table("opposed")
    val = lookup(table, bo)
    assert table.ratios[0] <= val <= table.ratios[-1]


def test_second_c_value_tables():
    for orientation in ("aided", "opposed"):
        table = build_lookup_table(orientation, 2.5e5)
        sign = 1.0 if orientation == "aided" else -1.0
        a = 2.5e5 * table.bo_grid
        resid = table.ratios ** P_EXP + sign * a / table.ratios ** 2 - 1.0
        assert float(np.max(np.abs(resid))) < 1.0e-10
    aided = build_lookup_table("aided", 2.5e5)
    assert aided.cap_point == pytest.approx(analytic_cap(2.5e5), rel=0.01)


def test_monotonicity_validation():
    with pytest.raises(ValueError):
        NuRatioTable("aided", DEFAULT_C, np.array([1.0e-8, 1.0e-7]),
                     np.array([0.8, 0.9]))
    with pytest.raises(ValueError):
        NuRatioTable("opposed", DEFAULT_C, np.array([1.0e-8, 1.0e-7]),
                     np.array([1.2, 1.1]))


def test_bad_orientation_rejected():
    with pytest.raises(ValueError):
        nu_ratio_solve(1.0e-6, "sideways")
    with pytest.raises(ValueError):
        build_lookup_table("sideways")


def test_write_ratio_table_format(tmp_path, aided_table):
    path = tmp_path / "aided.csv"
    write_ratio_table(aided_table, path)
    lines = path.read_text().splitlines()
    header_rows = [ln for ln in lines if ln.startswith("#")]
    assert header_rows
    data_start = lines.index("Bo*,ratio") + 1
    first = lines[data_start].split(",")
    assert float(first[0]) == aided_table.bo_grid[0]
    assert float(first[1]) == aided_table.ratios[0]
    assert len(lines) - data_start == aided_table.bo_grid.size
