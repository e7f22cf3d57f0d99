"""Friction and heat-transfer closures against independent oracles.

Turbulent friction values are checked two ways: frozen references from
a standalone bisection solve, and the defining residual evaluated in
the test itself.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gascore.correlations import (ALTERNATIVE_EXPONENTS, LAMINAR_NU,
                                  BulkState, CorrelationConfig, WallState,
                                  brunone_friction, brunone_k3,
                                  colebrook_residual, mean_specific_heat,
                                  petukhov_cf0, petukhov_nu, prandtl,
                                  property_corrected_cf, reynolds,
                                  steady_friction, supercritical_exponent_n,
                                  variable_property_nu)
from gascore.properties import build_helium_table

CFG = CorrelationConfig()


def bisect_colebrook(re):
    """Reference turbulent friction factor, solved independently."""

    def f(cf):
        return 1.0 / math.sqrt(cf) + 2.0 * math.log10(
            2.51 / (re * math.sqrt(cf)))

    lo, hi = 1.0e-5, 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_laminar_branch_exact():
    assert steady_friction(1000.0, CFG) == 64.0 / 1000.0
    assert steady_friction(2300.0, CFG) == pytest.approx(
        0.02782608695652174, rel=1.0e-14)


def test_turbulent_frozen_values():
    assert steady_friction(4000.0, CFG) == pytest.approx(
        0.039907014055634876, rel=1.0e-12)
    assert steady_friction(1.0e5, CFG) == pytest.approx(
        0.01798977308427383, rel=1.0e-12)


def test_blend_region_frozen_value():
    # log-linear bridge between the laminar and turbulent anchors
    assert steady_friction(3000.0, CFG) == pytest.approx(
        0.03308574267250559, rel=1.0e-12)


def test_blend_is_continuous_at_edges():
    eps = 1.0e-9
    lo = steady_friction(2300.0 * (1.0 + eps), CFG)
    assert lo == pytest.approx(64.0 / 2300.0, rel=1.0e-6)
    hi = steady_friction(4000.0 * (1.0 - eps), CFG)
    assert hi == pytest.approx(steady_friction(4000.0, CFG), rel=1.0e-6)


def test_turbulent_against_bisection():
    for re in np.logspace(math.log10(4000.0), 8.0, 30):
        cf = steady_friction(float(re), CFG)
        assert cf == pytest.approx(bisect_colebrook(float(re)),
                                   rel=1.0e-9)


def test_vector_matches_scalar_bitwise():
    re = np.array([800.0, 2300.0, 3100.0, 4000.0, 2.0e5, 1.0e7])
    vec = steady_friction(re, CFG)
    for i, r in enumerate(re):
        assert vec[i] == steady_friction(float(r), CFG)


@settings(derandomize=True, max_examples=60, deadline=None)
@given(st.floats(min_value=4.0e3, max_value=1.0e8))
def test_turbulent_residual_property(re):
    cf = steady_friction(re, CFG)
    assert abs(colebrook_residual(re, cf)) < 1.0e-10


def test_petukhov_cf0_frozen():
    assert petukhov_cf0(1.0e4) == pytest.approx(0.031477486878127174,
                                                rel=1.0e-13)
    assert petukhov_cf0(1.0e5) == pytest.approx(0.01798640524536161,
                                                rel=1.0e-13)
    re = 3.7e4
    direct = (1.82 * math.log10(re / 8.0)) ** -2
    assert petukhov_cf0(re) == pytest.approx(direct, rel=1.0e-14)


def test_petukhov_cf0_rejects_low_re():
    with pytest.raises(ValueError):
        petukhov_cf0(8.0)
    with pytest.raises(ValueError):
        petukhov_cf0(np.array([1.0e4, 5.0]))


def test_petukhov_nu_frozen_and_direct():
    cf = petukhov_cf0(1.0e4)
    nu = petukhov_nu(1.0e4, 0.66, cf)
    assert nu == pytest.approx(28.942741038884133, rel=1.0e-12)
    re, pr = 5.0e4, 0.7
    cf = petukhov_cf0(re)
    direct = (re * pr * cf / 8.0
              / (1.0 + 900.0 / re
                 + 12.7 * math.sqrt(cf / 8.0) * (pr ** (2.0 / 3.0) - 1.0)))
    assert petukhov_nu(re, pr, cf) == pytest.approx(direct, rel=1.0e-14)


def test_brunone_k3_laminar():
    # constant shear-decay coefficient below transition
    expected = math.sqrt(0.00476) / 2.0
    assert brunone_k3(1000.0, CFG) == pytest.approx(expected, rel=1.0e-14)
    assert brunone_k3(1000.0, CFG) == pytest.approx(0.034496376621320685,
                                                    rel=1.0e-13)


def test_brunone_k3_turbulent():
    re = 15200.0
    kappa = math.log10(15.29 / re ** 0.0567)
    c_star = 12.86 / re ** kappa
    assert brunone_k3(re, CFG) == pytest.approx(math.sqrt(c_star) / 2.0,
                                                rel=1.0e-14)
    assert brunone_k3(re, CFG) == pytest.approx(0.01874418846230474,
                                                rel=1.0e-13)


def test_brunone_k3_constant_mode():
    cfg = CorrelationConfig(k3_mode="constant", k3_constant=0.0225)
    assert brunone_k3(1.0e5, cfg) == 0.0225


def test_brunone_friction_composition():
    res = brunone_friction(0.03, 0.02, 0.01588, 10.0, 25.0)
    assert res.steady_part == 0.03
    assert res.transient_part == pytest.approx(0.02 * 0.01588 * 25.0
                                               / (10.0 * 10.0),
                                               rel=1.0e-14)
    assert res.c_f == pytest.approx(0.0300794, rel=1.0e-10)
    assert not res.velocity_floored


def test_brunone_friction_deceleration_reduces():
    res = brunone_friction(0.03, 0.02, 0.01588, 10.0, -25.0)
    assert res.c_f < 0.03


def test_brunone_velocity_floor():
    res = brunone_friction(0.03, 0.02, 0.01588, 5.0e-7, 100.0)
    assert res.velocity_floored
    assert res.transient_part == 0.0
    assert res.c_f == 0.03


def test_reynolds_prandtl_formulas():
    assert reynolds(4.4, 28.0, 0.01588, 3.9e-5) == pytest.approx(
        50164.51282051283, rel=1.0e-13)
    # velocity sign never matters
    assert reynolds(4.4, -28.0, 0.01588, 3.9e-5) == reynolds(
        4.4, 28.0, 0.01588, 3.9e-5)
    assert prandtl(5193.0, 3.9e-5, 0.3) == pytest.approx(
        5193.0 * 3.9e-5 / 0.3, rel=1.0e-14)


@pytest.fixture(scope="module")
def helium_states():
    table = build_helium_table()
    bulk = BulkState.from_sample(table.interpolate(763.15), velocity=28.0,
                                 diameter=0.01588)
    wall = WallState.from_sample(table.interpolate(900.0))
    return bulk, wall


def test_property_correction_unit_ratio_identity(helium_states):
    bulk, _ = helium_states
    same = WallState(temperature=bulk.temperature, density=bulk.density,
                     viscosity=bulk.viscosity, enthalpy=bulk.enthalpy)
    cf0 = 0.0213
    assert property_corrected_cf(cf0, bulk, same, CFG) == cf0


def test_property_correction_exponents(helium_states):
    bulk, wall = helium_states
    cf0 = 0.0213
    for m, n in ((0.4, 1.0), ALTERNATIVE_EXPONENTS):
        cfg = CorrelationConfig(density_exponent=m, viscosity_exponent=n)
        expected = cf0 * (wall.density / bulk.density) ** m \
            * (wall.viscosity / bulk.viscosity) ** n
        assert property_corrected_cf(cf0, bulk, wall, cfg) == \
            pytest.approx(expected, rel=1.0e-14)


def test_supercritical_exponent_branches():
    t_pc = 1000.0
    assert supercritical_exponent_n(800.0, 900.0, t_pc) == 0.4
    # wall crosses the pseudo-critical point
    assert supercritical_exponent_n(900.0, 1100.0, t_pc) == pytest.approx(
        0.4 + 0.2 * 0.1, rel=1.0e-14)
    # bulk slightly supercritical: the whole term is tapered
    n = supercritical_exponent_n(1100.0, 1150.0, t_pc)
    assert n == pytest.approx((0.4 + 0.2 * 0.15) * (1.0 - 5.0 * 0.1),
                              rel=1.0e-14)
    assert supercritical_exponent_n(1200.0, 1300.0, t_pc) == \
        pytest.approx(0.0, abs=1.0e-15)
    assert supercritical_exponent_n(1300.0, 1400.0, t_pc) == 0.4
    with pytest.raises(ValueError):
        supercritical_exponent_n(900.0, 800.0, t_pc)


def test_variable_property_nu_direct(helium_states):
    bulk, wall = helium_states
    t_pc = 850.0
    n = supercritical_exponent_n(bulk.temperature, wall.temperature, t_pc)
    cp_ratio = mean_specific_heat(bulk, wall) / bulk.specific_heat
    direct = (0.0183 * bulk.reynolds ** 0.82 * bulk.prandtl ** 0.5
              * (wall.density / bulk.density) ** 0.3 * cp_ratio ** n)
    assert variable_property_nu(bulk, wall, t_pc) == pytest.approx(
        direct, rel=1.0e-14)


def test_mean_specific_heat_equal_temperature_limit(helium_states):
    bulk, _ = helium_states
    same = WallState(temperature=bulk.temperature, density=bulk.density,
                     viscosity=bulk.viscosity, enthalpy=bulk.enthalpy)
    assert mean_specific_heat(bulk, same) == bulk.specific_heat


def test_laminar_nu_constant():
    assert LAMINAR_NU == 4.36
