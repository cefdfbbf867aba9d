"""Einstein wiring, Weyl divergence with sources, Weyl compatibility and the E/H split."""
import math

import numpy as np
import pytest

from conftest import ONE_DERIV, TWO_DERIV, assert_small
from riemcompat.catalog import catalog, random_metric, sample_points
from riemcompat.curvature import CurvaturePack
from riemcompat.errors import DimensionNot4, NotLorentzian, NotUnitTimelike
from riemcompat.gr import (
    c_ring,
    cring_commutes,
    eh_decompose,
    electric_magnetic,
    is_static,
    stress_from_einstein,
    weyl_compat_and_bianchi_like,
    weyl_compat_point,
    weyl_divergence_matter_residual,
    weyl_lower_value,
)


@pytest.fixture(scope="module")
def schwarzschild():
    return catalog("schwarzschild")


@pytest.fixture(scope="module")
def frw():
    return catalog("frw")


@pytest.fixture(scope="module")
def fluid_point():
    return catalog("weyl_compatible_point").data


def _static_u(g):
    return np.array([1.0 / math.sqrt(-g[0, 0]), 0.0, 0.0, 0.0])


# -- stress tensor -------------------------------------------------------------------

def test_minkowski_has_no_stress():
    md = stress_from_einstein(catalog("minkowski"), [0.1, 0.2, 0.3, 0.4])
    assert np.array_equal(md.T.at_value().values, np.zeros((4, 4)))


def test_schwarzschild_vacuum(schwarzschild):
    for p in sample_points(schwarzschild, 4, 0):
        pack = CurvaturePack(schwarzschild, p)
        md = stress_from_einstein(pack)
        scale = float(np.abs(pack.riemann.at_value().values).max())
        assert np.abs(md.T.at_value().values).max() <= 1e-9 * scale
        assert_small(md.einstein, 1e-12)
        assert_small(md.trace_relation, 1e-12)


def test_frw_perfect_fluid_closed_form(frw):
    """a = t^2: rho = 3 (a'/a)^2 = 12/t^2, pressure = -(2 a''/a + (a'/a)^2) = -8/t^2."""
    for p in sample_points(frw, 4, 1):
        t = p[0]
        md = stress_from_einstein(frw, p)
        T = md.T.at_value().values
        a2 = t**4
        oracle = np.diag([12 / t**2, -8 / t**2 * a2, -8 / t**2 * a2, -8 / t**2 * a2])
        assert np.allclose(T, oracle, rtol=1e-12, atol=1e-12)
        assert_small(md.trace_relation, 1e-12)


def test_coupling_scales_stress(frw):
    p = [1.5, 0.0, 0.1, 0.2]
    a = stress_from_einstein(frw, p, k=1.0).T.at_value().values
    b = stress_from_einstein(frw, p, k=2.0).T.at_value().values
    assert np.allclose(a, 2 * b, rtol=1e-15)


def test_riemannian_metric_rejected(metric4):
    with pytest.raises(NotLorentzian):
        stress_from_einstein(metric4, [0.5] * 4)


# -- Weyl divergence with sources ------------------------------------------------------

def test_weyl_divergence_matter_frw(frw):
    for p in sample_points(frw, 4, 2):
        assert_small(weyl_divergence_matter_residual(frw, p), ONE_DERIV)


def test_printed_trace_sign_fails_on_frw(frw):
    """With a plus sign on the trace term the relation fails on a conformally flat fluid."""
    p = sample_points(frw, 1, 2)[0]
    assert weyl_divergence_matter_residual(frw, p, trace_sign=+1).scaled_max > 0.1


def test_weyl_divergence_matter_random_lorentzian():
    for seed in range(3):
        m = random_metric(4, seed, lorentzian=True)
        for p in sample_points(m, 2, seed):
            assert_small(weyl_divergence_matter_residual(m, p, k=0.7), ONE_DERIV)
            assert weyl_divergence_matter_residual(m, p, trace_sign=+1).scaled_max > 1e-3


def test_vacuum_weyl_is_divergence_free(schwarzschild):
    for p in sample_points(schwarzschild, 3, 3):
        res = weyl_divergence_matter_residual(schwarzschild, p)
        assert res.max_abs <= 1e-9 * max(1.0, res.scale)


# -- Weyl compatibility and its Bianchi-like equation --------------------------------------

def test_bianchi_like_on_frw_and_vacuum(frw, schwarzschild):
    for m in (frw, schwarzschild):
        for p in sample_points(m, 2, 4):
            first, second = weyl_compat_and_bianchi_like(m, p)
            assert_small(first, TWO_DERIV)
            assert second.scaled_max <= TWO_DERIV
    first, second = weyl_compat_and_bianchi_like(frw, sample_points(frw, 1, 0)[0])
    assert second.max_abs <= 1e-14


def test_bianchi_like_random_lorentzian():
    m = random_metric(4, 11, lorentzian=True)
    for p in sample_points(m, 2, 5):
        first, second = weyl_compat_and_bianchi_like(m, p)
        assert_small(first, TWO_DERIV)
        assert second.scaled_max > 1e-4


# -- electric and magnetic parts ----------------------------------------------------------

def test_frw_comoving_parts_vanish(frw):
    for p in sample_points(frw, 2, 6):
        pack = CurvaturePack(frw, p, 2)
        eh = electric_magnetic(pack, [1.0, 0, 0, 0])
        scale = float(np.abs(pack.riemann.values).max())
        assert np.abs(eh.E).max() <= 1e-9 * scale
        assert np.abs(eh.H).max() <= 1e-9 * scale
        assert np.abs(weyl_lower_value(pack)).max() <= 1e-9 * scale


@pytest.mark.parametrize("r", [3.0, 5.0])
def test_schwarzschild_static_parts(schwarzschild, r):
    rs = 1.0
    p = np.array([0.5, r, 1.1, 0.7])
    pack = CurvaturePack(schwarzschild, p, 2)
    assert is_static(pack)
    g = pack.g.values
    u = _static_u(g)
    eh = electric_magnetic(pack, u)
    assert np.abs(eh.H).max() <= 1e-8
    # orthonormal static frame: E = diag(rs/r^3, -rs/(2 r^3), -rs/(2 r^3))
    hat = np.array([eh.E[1, 1] / g[1, 1], eh.E[2, 2] / g[2, 2], eh.E[3, 3] / g[3, 3]])
    assert np.allclose(hat, np.array([1.0, -0.5, -0.5]) * rs / r**3, rtol=1e-10)
    assert np.abs(eh.E - np.diag(np.diag(eh.E))).max() <= 1e-12
    for res in eh.residuals(u, g).values():
        assert res.scaled_max <= 1e-9


def test_boosted_observer_sees_magnetic_part(schwarzschild):
    p = np.array([0.5, 3.0, 1.1, 0.7])
    pack = CurvaturePack(schwarzschild, p, 2)
    g = pack.g.values
    v = 0.5
    u = np.array([1.0 / math.sqrt(-g[0, 0]), 0.0, 0.0, v / math.sqrt(g[3, 3])]) / math.sqrt(1 - v**2)
    eh = electric_magnetic(pack, u)
    assert np.abs(eh.H).max() > 1e-3
    assert eh.residuals(u, g)["H_symmetry"].max_abs == 0.0


def test_eh_input_errors(schwarzschild):
    pack = CurvaturePack(schwarzschild, [0.5, 3.0, 1.1, 0.7], 2)
    with pytest.raises(NotUnitTimelike):
        electric_magnetic(pack, [1.0, 0, 0, 0])
    with pytest.raises(DimensionNot4):
        eh_decompose(np.zeros((3,) * 4), np.diag([-1.0, 1, 1]), u=[1.0, 0, 0])
    with pytest.raises(NotLorentzian):
        eh_decompose(np.zeros((4,) * 4), np.eye(4), u=[1.0, 0, 0, 0])


# -- Weyl-compatible stress tensors ---------------------------------------------------------

def test_fluid_fixture_is_weyl_compatible(fluid_point):
    d = fluid_point
    assert weyl_compat_point(d["T"], d["weyl_lower"], d["g"]).scaled_max <= 1e-14


def test_generalized_magnetic_part_vanishes(fluid_point):
    d = fluid_point
    gen = eh_decompose(d["weyl_lower"], d["g"], T=d["T"])
    std = eh_decompose(d["weyl_lower"], d["g"], u=d["u"])
    scale = float(np.abs(d["weyl_lower"]).max())
    assert np.abs(gen.H).max() <= 1e-12 * scale
    # T = (rho + p) u u + p g: the trace of the Weyl tensor drops the p g part
    assert np.allclose(gen.E, (d["rho"] + d["pressure"]) * std.E, atol=1e-10 * scale)
    assert np.allclose(c_ring(d["T"], d["weyl_lower"], d["g"]), gen.E, atol=1e-15)


def test_cring_commutes_for_fluid(fluid_point):
    d = fluid_point
    assert cring_commutes(d["T"], d["weyl_lower"], d["g"]).scaled_max <= 1e-12


def test_cring_with_metric_proportional_stress(fluid_point):
    d = fluid_point
    res = cring_commutes(2.5 * d["g"], d["weyl_lower"], d["g"])
    assert res.max_abs <= 1e-13


def test_random_stress_negative_control(fluid_point, rng):
    d = fluid_point
    T = rng.normal(size=(4, 4))
    T = T + T.T
    assert weyl_compat_point(T, d["weyl_lower"], d["g"]).scaled_max > 1e-3
    assert cring_commutes(T, d["weyl_lower"], d["g"]).scaled_max > 1e-3
    assert np.abs(eh_decompose(d["weyl_lower"], d["g"], T=T).H).max() > 1e-3
