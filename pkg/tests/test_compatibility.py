"""Codazzi deviation, compatibility residuals and the identities built on them."""
import numpy as np
import pytest

from conftest import ALGEBRAIC, ONE_DERIV, TWO_DERIV, assert_small, metric_points
from riemcompat.catalog import catalog, random_field, random_metric, sample_points
from riemcompat.compatibility import (
    build_k_from_b,
    codazzi_deviation,
    commutation_checks,
    compat_residual,
    compat_tensor,
    deviation_bianchi_residual,
    identity4_residual,
    k_tensor_symmetry_residuals,
    lovelock_residual,
    remark1_deviation_shift,
    veblen_residuals,
)
from riemcompat.curvature import CurvaturePack, TensorField
from riemcompat.errors import ShapeMismatch
from riemcompat.tensor import DenseTensor


def _ricci_eigen_commuting_b(pack, rng):
    """Symmetric b sharing the eigenvectors of the Ricci operator."""
    g = pack.g.values
    ric = pack.ricci.values
    w, v = np.linalg.eig(np.linalg.solve(g, ric))
    v = np.real(v)
    low = g @ v
    norms = np.einsum("ia,ia->a", v, low)
    mu = rng.normal(size=len(w))
    b = sum(mu[a] * np.outer(low[:, a], low[:, a]) / norms[a] for a in range(len(w)))
    return DenseTensor.from_values(b, "ll")


# -- Codazzi deviation ------------------------------------------------------------

def test_deviation_of_metric_vanishes(metric3):
    p = sample_points(metric3, 1, 0)[0]
    c = codazzi_deviation(metric3, CurvaturePack(metric3, p).g, p)
    assert np.abs(c.values).max() <= 1e-13


def test_hessian_on_flat_space_is_codazzi():
    m = catalog("flat", n=3)
    h = TensorField.build("h", "ll", m.coords, {
        (0, 0): "2*x1 - sin(x0)", (0, 1): "2*x0", (0, 2): "0",
        (1, 1): "exp(x2)", (1, 2): "x1*exp(x2)", (2, 2): "0.5*x1^2*exp(x2)",
    })  # Hessian of x0^2 x1 + sin(x0) + x1^2/2 exp(x2)
    for p in sample_points(m, 4, 2):
        assert np.abs(codazzi_deviation(m, h, p).values).max() <= 1e-14
    # independent check of the Hessian field against finite differences of its potential
    f = lambda x: x[0] ** 2 * x[1] + np.sin(x[0]) + 0.5 * x[1] ** 2 * np.exp(x[2])  # noqa: E731
    p = np.array([0.3, -0.2, 0.4])
    eps = 1e-4
    fd = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            ei, ej = np.eye(3)[i] * eps, np.eye(3)[j] * eps
            fd[i, j] = (f(p + ei + ej) - f(p + ei - ej) - f(p - ei + ej) + f(p - ei - ej)) / (4 * eps**2)
    assert np.allclose(h.jet(p, 0).values, fd, atol=1e-6)


def test_deviation_properties(metric3, field_b3):
    p = sample_points(metric3, 1, 4)[0]
    c = codazzi_deviation(metric3, field_b3, p).values
    s = max(1.0, np.abs(c).max())
    assert np.abs(c + c.transpose(1, 0, 2)).max() <= 1e-14 * s
    cyc = c + np.einsum("jkl->klj", c) + np.einsum("jkl->ljk", c)
    assert np.abs(cyc).max() <= 1e-13 * s


def test_deviation_of_ricci_is_minus_riemann_divergence(metric3):
    for p in sample_points(metric3, 3, 5):
        pack = CurvaturePack(metric3, p)
        c = codazzi_deviation(pack, pack.ricci).at_value().values
        div = np.einsum("mjklm->jkl", pack.nabla(pack.riemann).at_value().values)
        assert np.abs(c + div).max() <= ONE_DERIV * max(1.0, np.abs(c).max())


# -- compatibility residual ---------------------------------------------------------

def test_flat_space_is_compatible_with_anything(rng):
    m = catalog("flat", n=3)
    pack = CurvaturePack(m, [0.1, 0.2, 0.3], 2)
    b = rng.normal(size=(3, 3))
    res = compat_residual(pack.riemann, DenseTensor.from_values(b + b.T, "ll"))
    assert res.max_abs == 0.0


def test_compat_shape_errors(metric3):
    pack = CurvaturePack(metric3, [0.5, 0.5, 0.5], 2)
    with pytest.raises(ShapeMismatch):
        compat_residual(pack.riemann_lower, pack.g)
    with pytest.raises(ShapeMismatch):
        compat_residual(pack.riemann, DenseTensor.from_values(np.eye(2), "ll"))


def test_compat_tensor_matches_loop(metric3, rng):
    pack = CurvaturePack(metric3, [0.4, 0.5, 0.6], 2)
    r = pack.riemann.values
    b = rng.normal(size=(3, 3))
    b = b + b.T
    out = compat_tensor(pack.riemann, DenseTensor.from_values(b, "ll")).values
    oracle = np.zeros((3,) * 4)
    for i, j, k, l, m in np.ndindex(3, 3, 3, 3, 3):
        oracle[i, j, k, l] += b[i, m] * r[j, k, l, m] + b[j, m] * r[k, i, l, m] + b[k, m] * r[i, j, l, m]
    assert np.allclose(out, oracle, atol=1e-15)


def test_any_b_is_compatible_in_two_dimensions():
    for m, p in metric_points(2, range(5), count=2):
        pack = CurvaturePack(m, p, 2)
        b = random_field(m, int(1e3 * p[0])).jet(p, 0)
        assert_small(compat_residual(pack.riemann, b), ALGEBRAIC)


def test_ricci_is_compatible_in_three_dimensions():
    for m, p in metric_points(3, range(5), count=2):
        pack = CurvaturePack(m, p, 2)
        assert_small(compat_residual(pack.riemann, pack.ricci), ALGEBRAIC)
        b = random_field(m, 3).jet(p, 0)
        assert compat_residual(pack.riemann, b).scaled_max > 1e-3 * max(1.0, np.abs(pack.riemann.values).max())


def test_ricci_commuting_b_is_compatible_in_three_dimensions(rng):
    for m, p in metric_points(3, range(5), count=2):
        pack = CurvaturePack(m, p, 2)
        b = _ricci_eigen_commuting_b(pack, rng)
        assert_small(commutation_checks(pack.riemann, pack.g, b)["ricci"], ALGEBRAIC)
        assert_small(compat_residual(pack.riemann, b), ONE_DERIV)


# -- universal differential identities --------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
def test_deviation_bianchi_identity_is_universal(n):
    for m, p in metric_points(n, range(2), count=2):
        b = random_field(m, 50 + n)
        assert_small(identity4_residual(m, b, p), ONE_DERIV)


def test_identity_with_ricci_in_four_dimensions(metric4):
    for p in sample_points(metric4, 2, 1):
        pack = CurvaturePack(metric4, p)
        assert_small(identity4_residual(pack, pack.ricci), ONE_DERIV)


def test_identity_with_metric_has_vanishing_sides(metric3):
    p = sample_points(metric3, 1, 1)[0]
    pack = CurvaturePack(metric3, p)
    res = identity4_residual(pack, pack.g)
    assert res.max_abs <= 1e-12
    assert deviation_bianchi_residual(pack, pack.g).max_abs <= 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_deviation_bianchi_tracks_compatibility(n):
    for m, p in metric_points(n, range(2), count=2):
        pack = CurvaturePack(m, p)
        b = random_field(m, 77)
        dev = deviation_bianchi_residual(pack, b)
        comp = compat_residual(pack.riemann, pack.field(b))
        assert abs(dev.max_abs - comp.max_abs) <= ONE_DERIV * max(dev.scale, comp.scale)
        if n == 2:
            assert dev.scaled_max <= ALGEBRAIC


def test_flat_deviation_bianchi_is_zero():
    m = catalog("flat", n=3)
    b = random_field(m, 1)
    assert deviation_bianchi_residual(m, b, [0.1, 0.2, 0.3]).max_abs == 0.0


@pytest.mark.parametrize("n", [3, 4])
def test_veblen_identity_is_universal(n):
    for m, p in metric_points(n, range(2), count=2):
        first, _ = veblen_residuals(m, random_field(m, 5), p)
        assert_small(first, ONE_DERIV)


def test_veblen_algebraic_side_for_ricci_in_three_dimensions(metric3):
    for p in sample_points(metric3, 3, 2):
        pack = CurvaturePack(metric3, p)
        _, second = veblen_residuals(pack, pack.ricci)
        assert_small(second, ALGEBRAIC)


def test_veblen_on_flat_space_is_zero():
    m = catalog("flat", n=4)
    first, second = veblen_residuals(m, random_field(m, 2), [0.1, 0.2, 0.3, 0.4])
    assert second.max_abs == 0.0
    assert first.scaled_max <= 1e-15  # nonzero derivatives of b cancel up to rounding


@pytest.mark.parametrize("n", [3, 4])
def test_lovelock_identity(n):
    for m, p in metric_points(n, range(2), count=1):
        assert_small(lovelock_residual(m, p), TWO_DERIV)


def test_lovelock_on_constant_curvature_both_sides_vanish():
    m = catalog("constant_curvature", n=4, K=0.8)
    for p in sample_points(m, 2, 3):
        pack = CurvaturePack(m, p)
        res = lovelock_residual(pack)
        assert res.max_abs <= ALGEBRAIC
        # closed form with R_kl = R_kml^m and positive scalar curvature for K > 0
        g = pack.g.values.copy()
        closed = 0.8 * (np.einsum("km,jl->jklm", g, g) - np.einsum("jm,kl->jklm", g, g))
        assert np.allclose(pack.riemann_lower.values, closed, atol=1e-12 * np.abs(closed).max())


# -- K-tensors built from compatible fields ------------------------------------------------

def test_k_from_metric_is_lowered_riemann(metric3):
    pack = CurvaturePack(metric3, [0.3, 0.3, 0.3], 2)
    k = build_k_from_b(pack.riemann_lower, pack.g, pack.g)
    assert np.allclose(k.values, pack.riemann_lower.values, atol=1e-15)


def test_k_from_ricci_is_k_tensor(metric3):
    for p in sample_points(metric3, 3, 8):
        pack = CurvaturePack(metric3, p, 2)
        for res in k_tensor_symmetry_residuals(build_k_from_b(pack.riemann_lower, pack.ricci, pack.g)).values():
            assert_small(res, ALGEBRAIC)


def test_k_bianchi_defect_equals_contracted_compatibility(metric4, field_b4):
    """For non-compatible b the Bianchi sum of R b b is minus the compat tensor transvected with b."""
    p = sample_points(metric4, 1, 3)[0]
    pack = CurvaturePack(metric4, p, 2)
    b = field_b4.jet(p, 0)
    k = build_k_from_b(pack.riemann_lower, b, pack.g).values
    bianchi = k + np.einsum("jkil->ijkl", k) + np.einsum("kijl->ijkl", k)
    comp = compat_tensor(pack.riemann, b).values
    bmix = np.linalg.solve(pack.g.values, b.values)  # b^q_l
    oracle = -np.einsum("ijkq,ql->ijkl", comp, bmix)
    scale = np.abs(k).max()
    assert np.abs(bianchi - oracle).max() <= 1e-12 * scale
    assert np.abs(bianchi).max() >= 1e-3 * scale


def test_riemann_is_k_tensor_and_junk_is_not(metric4, rng):
    pack = CurvaturePack(metric4, [0.2, 0.4, 0.6, 0.8], 2)
    for res in k_tensor_symmetry_residuals(pack.riemann_lower).values():
        assert res.scaled_max <= 1e-10
    junk = rng.normal(size=(4,) * 4)
    junk = junk + junk.transpose(1, 0, 2, 3)
    res = k_tensor_symmetry_residuals(DenseTensor.from_values(junk, "llll"))
    assert res["antisymmetry"].scaled_max > 0.1


# -- commutators ---------------------------------------------------------------------------

def test_ricci_commutes_with_itself_in_three_dimensions(metric3):
    for p in sample_points(metric3, 3, 1):
        pack = CurvaturePack(metric3, p, 2)
        out = commutation_checks(pack.riemann, pack.g, pack.ricci)
        assert out["ricci"].max_abs <= 1e-15 * max(1.0, out["ricci"].scale)
        assert_small(out["bourguignon"], ALGEBRAIC)


def test_metric_commutes_with_everything(metric4):
    pack = CurvaturePack(metric4, [0.5] * 4, 2)
    out = commutation_checks(pack.riemann, pack.g, pack.g, h=pack.g, b_prime=pack.g)
    for res in out.values():
        assert res.scaled_max <= 1e-14


def test_k_ring_commutes_on_constant_curvature(rng):
    m = catalog("constant_curvature", n=4)
    p = sample_points(m, 1, 0)[0]
    pack = CurvaturePack(m, p, 2)
    b = rng.normal(size=(4, 4))
    b = DenseTensor.from_values(b + b.T, "ll")
    bm = np.linalg.solve(pack.g.values, b.values)
    h = DenseTensor.from_values(b.values @ bm, "ll")
    out = commutation_checks(pack.riemann, pack.g, b, h=h)
    assert_small(out["k_ring"], ALGEBRAIC)
    assert_small(compat_residual(pack.riemann, b), ALGEBRAIC)


def test_commutator_detects_generic_b(metric3, field_b3):
    pack = CurvaturePack(metric3, [0.5] * 3, 2)
    out = commutation_checks(pack.riemann, pack.g, field_b3.jet([0.5] * 3, 0))
    assert out["ricci"].scaled_max > 1e-4


# -- conditional chain on the three compatible families ---------------------------------------

def _chain(pack, b):
    assert_small(compat_residual(pack.riemann, b), ALGEBRAIC)
    comm = commutation_checks(pack.riemann, pack.g, b)
    assert_small(comm["ricci"], ALGEBRAIC)
    assert_small(comm["bourguignon"], ALGEBRAIC)
    for res in k_tensor_symmetry_residuals(build_k_from_b(pack.riemann_lower, b, pack.g)).values():
        assert_small(res, ALGEBRAIC)


def test_conditional_chain_families(rng):
    for m, p in metric_points(2, range(3), count=2):
        pack = CurvaturePack(m, p)
        _chain(pack, random_field(m, 4).jet(p, 0))
    for m, p in metric_points(3, range(3), count=2):
        pack = CurvaturePack(m, p)
        _chain(pack, pack.ricci.at_value())
        _, veb = veblen_residuals(pack, pack.ricci)
        assert_small(veb, ALGEBRAIC)
    m = catalog("constant_curvature", n=4)
    for p in sample_points(m, 3, 4):
        pack = CurvaturePack(m, p)
        b = random_field(m, 9)
        _chain(pack, b.jet(p, 0))
        _, veb = veblen_residuals(pack, b)
        assert_small(veb, ALGEBRAIC)


# -- shifting by a Codazzi tensor -------------------------------------------------------------

def test_shift_by_metric_times_coordinate():
    m = catalog("flat", n=3)
    b = random_field(m, 3)
    chi = TensorField.scalar("chi", m.coords, "x0")
    res = remark1_deviation_shift(m, b, lambda pk: pk.g, chi, [0.1, 0.2, 0.3])
    assert res.scaled_max <= 1e-10


def test_shift_by_constant_leaves_deviation():
    m = catalog("flat", n=3)
    b = random_field(m, 3)
    chi = TensorField.scalar("chi", m.coords, "2.5")
    p = [0.1, 0.2, 0.3]
    res = remark1_deviation_shift(m, b, lambda pk: pk.g, chi, p)
    assert res.scaled_max <= 1e-14


def test_shift_by_hessian_field(metric3):
    m = catalog("flat", n=3)
    a = TensorField.build("a", "ll", m.coords, {(0, 0): "6*x0*x1", (0, 1): "3*x0^2", (1, 1): "0", (2, 2): "cos(x2)*(-1)"})
    chi = TensorField.scalar("chi", m.coords, "sin(x0 + 2*x1)*exp(x2)")
    b = random_field(m, 13)
    for p in sample_points(m, 3, 6):
        assert np.abs(codazzi_deviation(m, a, p).values).max() <= 1e-14
        assert remark1_deviation_shift(m, b, a, chi, p).scaled_max <= ALGEBRAIC


def test_veblen_sum_matches_algebraic_side(metric4, field_b4):
    from riemcompat.compatibility import veblen_sum

    pack = CurvaturePack(metric4, [0.2, 0.3, 0.4, 0.5])
    _, second = veblen_residuals(pack, field_b4)
    alone = veblen_sum(pack.riemann, field_b4.jet([0.2, 0.3, 0.4, 0.5], 0))
    assert np.array_equal(alone.value, second.value)
    assert alone.scale == second.scale
    assert alone.anchor == "veblenb"


def test_shift_sign_is_plus():
    """Deviation of b + chi g minus that of b is +(g_kl d_j chi - g_jl d_k chi), not minus."""
    from riemcompat.compatibility import codazzi_deviation
    from riemcompat.tensor import jeinsum

    m = catalog("flat", n=3)
    b = random_field(m, 3)
    chi = TensorField.scalar("chi", m.coords, "x0*x1 + sin(x2)")
    p = [0.1, 0.2, 0.3]
    pack = CurvaturePack(m, p, 2)
    bt, xt = pack.field(b), pack.field(chi)
    diff = (codazzi_deviation(pack, bt + jeinsum("kl,->kl", pack.g, xt)) - codazzi_deviation(pack, bt)).at_value().values
    g = pack.g.values
    d = xt.partials().at_value().values
    plus = np.einsum("kl,j->jkl", g, d) - np.einsum("jl,k->jkl", g, d)
    assert np.abs(diff - plus).max() <= 1e-13
    assert np.abs(diff + plus).max() >= 0.5
