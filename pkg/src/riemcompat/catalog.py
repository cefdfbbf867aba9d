"""Built-in metrics, field fixtures, and point-level algebraic fixtures.

Named entries are produced by :func:`catalog`; the random analytic family
(:func:`random_metric`) backs the property tests and the sign calibration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .curvature import ChartedMetric, TensorField
from .errors import UnknownCatalogEntry
from .tensor import DenseTensor, levi_civita

_FREQS_CACHE: dict[int, list[tuple[int, ...]]] = {}


def _num(x: float) -> str:
    return repr(float(x))


def _frequencies(n: int) -> list[tuple[int, ...]]:
    """Nonzero integer frequency vectors with |k|_1 <= 2."""
    if n not in _FREQS_CACHE:
        import itertools

        out = [k for k in itertools.product(range(-2, 3), repeat=n) if 0 < sum(map(abs, k)) <= 2]
        _FREQS_CACHE[n] = out
    return _FREQS_CACHE[n]


def _phase(k, coords) -> str:
    parts = []
    for c, name in zip(k, coords):
        if c:
            parts.append(f"{c}*{name}")
    return " + ".join(parts)


def _trig_poly(rng: np.random.Generator, coords, nterms: int, normalize: bool) -> str:
    freqs = _frequencies(len(coords))
    picks = rng.choice(len(freqs), size=nterms, replace=False)
    coefs = rng.uniform(-1.0, 1.0, size=2 * nterms + 1)
    if normalize:
        coefs /= max(1.0, float(np.abs(coefs).sum()))
    terms = [_num(coefs[0])]
    for q, idx in enumerate(picks):
        ph = _phase(freqs[idx], coords)
        terms.append(f"{_num(coefs[2 * q + 1])}*cos({ph})")
        terms.append(f"{_num(coefs[2 * q + 2])}*sin({ph})")
    return " + ".join(terms)


def random_metric(n: int, seed: int, lorentzian: bool = False, eps: float = 0.1, nterms: int = 3) -> ChartedMetric:
    """``g_ij = eta_ij + eps * (trig polynomial of degree <= 2)`` on ``[0, 1]^n``.

    Coefficients are drawn from U(-1, 1) and each component polynomial is scaled
    so the sum of its absolute coefficients is at most one, which keeps every
    perturbation entry below ``eps`` in magnitude and the metric nondegenerate.
    """
    rng = np.random.default_rng(seed)
    coords = tuple(f"x{i}" for i in range(n))
    comps = {}
    for i in range(n):
        for j in range(i, n):
            base = ""
            if i == j:
                base = "-1 + " if (lorentzian and i == 0) else "1 + "
            comps[(i, j)] = f"{base}{_num(eps)}*({_trig_poly(rng, coords, nterms, True)})"
    sig = (-1,) + (1,) * (n - 1) if lorentzian else (1,) * n
    kind = "lorentzian" if lorentzian else "riemannian"
    return ChartedMetric.build(f"random_{kind}_n{n}_s{seed}", coords, comps, {}, sig, [(0.0, 1.0)] * n)


def random_field(metric: ChartedMetric, seed: int, variance=("l", "l"), nterms: int = 3, name: str = "b") -> TensorField:
    """Random trig-polynomial field with O(1) coefficients (symmetric when rank 2)."""
    rng = np.random.default_rng(seed)
    n = metric.dim
    rank = len(variance)
    if rank == 0:
        comps = {(): _trig_poly(rng, metric.coords, nterms, False)}
    elif rank == 1:
        comps = {(i,): _trig_poly(rng, metric.coords, nterms, False) for i in range(n)}
    elif rank == 2:
        comps = {(i, j): _trig_poly(rng, metric.coords, nterms, False) for i in range(n) for j in range(i, n)}
    else:
        raise ValueError("random fields of rank <= 2 only")
    return TensorField.build(name, variance, metric.coords, comps, {}, symmetric=rank == 2)


def sample_points(metric: ChartedMetric, count: int, seed: int, margin: float = 0.05) -> np.ndarray:
    """Seeded uniform points in the domain interior, keeping a relative margin."""
    rng = np.random.default_rng(seed)
    lo = np.array([d[0] for d in metric.domain])
    hi = np.array([d[1] for d in metric.domain])
    u = rng.uniform(size=(count, metric.dim))
    return lo + (hi - lo) * (margin + (1.0 - 2.0 * margin) * u)


@dataclass(frozen=True)
class Fixture:
    """Catalog entry bundling a metric (or point data) with fields and expectations."""

    name: str
    metric: ChartedMetric | None = None
    fields: dict[str, Any] = field(default_factory=dict)
    data: dict[str, Any] = field(default_factory=dict)
    expected: dict[str, str] = field(default_factory=dict)


# -- metric entries ----------------------------------------------------------

def _flat(n: int = 4) -> ChartedMetric:
    coords = tuple(f"x{i}" for i in range(n))
    return ChartedMetric.build(f"flat_n{n}", coords, {(i, i): "1" for i in range(n)}, {}, (1,) * n, [(-1.0, 1.0)] * n)


def _minkowski() -> ChartedMetric:
    comps = {(0, 0): "-1", (1, 1): "1", (2, 2): "1", (3, 3): "1"}
    return ChartedMetric.build("minkowski", ("t", "x", "y", "z"), comps, {}, (-1, 1, 1, 1), [(-1.0, 1.0)] * 4)


def _two_sphere(r: float = 1.0) -> ChartedMetric:
    comps = {(0, 0): "r^2", (1, 1): "r^2*sin(theta)^2"}
    return ChartedMetric.build("two_sphere", ("theta", "phi"), comps, {"r": r}, (1, 1), [(0.0, math.pi), (0.0, 2 * math.pi)])


def _polar_plane() -> ChartedMetric:
    return ChartedMetric.build("polar_plane", ("r", "phi"), {(0, 0): "1", (1, 1): "r^2"}, {}, (1, 1), [(0.5, 2.0), (0.0, 2 * math.pi)])


def _constant_curvature(n: int = 4, K: float = 1.0) -> ChartedMetric:
    """Stereographic chart: ``g = 4 delta / (1 + K |x|^2)^2`` has sectional curvature K."""
    coords = tuple(f"x{i}" for i in range(n))
    rho = " + ".join(f"{c}^2" for c in coords)
    comps = {(i, i): f"4/(1 + K*({rho}))^2" for i in range(n)}
    return ChartedMetric.build(f"constant_curvature_n{n}", coords, comps, {"K": K}, (1,) * n, [(-0.5, 0.5)] * n)


def _schwarzschild(rs: float = 1.0) -> ChartedMetric:
    comps = {
        (0, 0): "-(1 - rs/r)",
        (1, 1): "1/(1 - rs/r)",
        (2, 2): "r^2",
        (3, 3): "r^2*sin(theta)^2",
    }
    dom = [(0.0, 1.0), (2.5 * rs, 6.0 * rs), (0.3, math.pi - 0.3), (0.0, 2 * math.pi)]
    return ChartedMetric.build("schwarzschild", ("t", "r", "theta", "phi"), comps, {"rs": rs}, (-1, 1, 1, 1), dom)


def _frw(p: float = 2.0) -> ChartedMetric:
    """Spatially flat FRW with scale factor ``a(t) = t^p``."""
    a2 = "t^(2*p)"
    comps = {(0, 0): "-1", (1, 1): a2, (2, 2): a2, (3, 3): a2}
    return ChartedMetric.build("frw", ("t", "x", "y", "z"), comps, {"p": p}, (-1, 1, 1, 1), [(1.0, 2.0)] + [(-1.0, 1.0)] * 3)


# -- field fixtures ----------------------------------------------------------

def _gnomonic_pair() -> Fixture:
    """Unit sphere in the gnomonic chart, geodesically mapped onto the Euclidean plane."""
    s = "(1 + x^2 + y^2)"
    comps = {(0, 0): f"(1 + y^2)/{s}^2", (0, 1): f"-x*y/{s}^2", (1, 1): f"(1 + x^2)/{s}^2"}
    g = ChartedMetric.build("gnomonic_sphere", ("x", "y"), comps, {}, (1, 1), [(-1.0, 1.0), (-1.0, 1.0)])
    gbar = TensorField.build("gbar", ("l", "l"), g.coords, {(0, 0): "1", (1, 1): "1"})
    X = TensorField.build("X", ("l",), g.coords, {(0,): f"x/{s}", (1,): f"y/{s}"}, symmetric=False)
    return Fixture(
        "gnomonic_pair", g, {"gbar": gbar, "X": X},
        expected={
            "X": "X_j = x_j/(1+|x|^2) equals the Christoffel-trace difference divided by n+1",
            "mapped_riemann": "Riemann of g mapped by P = nabla X - X X vanishes (target is flat)",
            "gbar": "gbar is compatible with the Riemann tensor of g",
        },
    )


def _sinyukov(n: int = 3, alpha: float = 0.7, c=None, b0: float = 5.0) -> Fixture:
    """Flat space, ``phi = alpha/2 |x|^2 + c.x``, ``b = alpha x x + c x + x c + b0 I``.

    Then ``d_k b_jl = g_kl d_j phi + g_kj d_l phi`` holds identically.
    """
    c = list(c) if c is not None else [0.3, -0.2, 0.5, 0.1][:n]
    M = _flat(n)
    xs = M.coords
    comps = {}
    for j in range(n):
        for l in range(j, n):
            expr = f"{_num(alpha)}*{xs[j]}*{xs[l]} + {_num(c[j])}*{xs[l]} + {_num(c[l])}*{xs[j]}"
            if j == l:
                expr += f" + {_num(b0)}"
            comps[(j, l)] = expr
    b = TensorField.build("b", ("l", "l"), xs, comps)
    phi_src = " + ".join([f"{_num(alpha / 2)}*{x}^2" for x in xs] + [f"{_num(ci)}*{x}" for ci, x in zip(c, xs)])
    phi = TensorField.scalar("phi", xs, phi_src)
    return Fixture("sinyukov", M, {"b": b, "phi": phi},
                   expected={"sinyukov": "nabla_k b_jl = g_kl d_j phi + g_kj d_l phi", "compat": "b is R-compatible"})


def _genweyl(n: int = 4, seed: int = 11) -> Fixture:
    """``b = f g`` on a random metric: deviation ``lambda_j g_kl - lambda_k g_jl`` with closed ``lambda = df``."""
    M = random_metric(n, seed)
    xs = M.coords
    f_src = f"{xs[0]}^2 + sin({xs[1]})"
    comps = {idx: f"({f_src})*({e.source})" for idx, e in M.components.items()}
    b = TensorField.build("b", ("l", "l"), xs, comps)
    lam = {(0,): f"2*{xs[0]}", (1,): f"cos({xs[1]})"}
    lam.update({(i,): "0" for i in range(2, n)})
    lam_f = TensorField.build("lambda", ("l",), xs, lam, symmetric=False)
    return Fixture("genweyl", M, {"b": b, "lambda": lam_f},
                   expected={"genweyl": "C_jkl = lambda_j g_kl - lambda_k g_jl with closed lambda", "compat": "b is R-compatible"})


def _quasi_codazzi() -> Fixture:
    """Flat n=3: ``b = exp(xi) Hess(h)`` with ``beta = d xi`` solves the gauged Codazzi condition."""
    M = _flat(3)
    xi = "0.3*x0 + 0.2*x1^2"
    hess = {
        (0, 0): "2*x1", (0, 1): "2*x0", (0, 2): "2*x2",
        (1, 1): "0", (1, 2): "0", (2, 2): "2*x0 - sin(x2)",
    }  # Hessian of h = x0^2 x1 + x0 x2^2 + sin(x2)
    b = TensorField.build("b", ("l", "l"), M.coords, {k: f"exp({xi})*({v})" for k, v in hess.items()})
    beta = TensorField.build("beta", ("l",), M.coords, {(0,): "0.3", (1,): "0.4*x1", (2,): "0"}, symmetric=False)
    return Fixture("quasi_codazzi", M, {"b": b, "beta": beta},
                   expected={"quasi_codazzi": "(nabla_j - beta_j) b_kl = (nabla_k - beta_k) b_jl"})


# -- point-level fixtures ------------------------------------------------------

def qcc_riemann(g: np.ndarray, t: np.ndarray, p: float, q: float) -> np.ndarray:
    """All-lower quasi-constant-curvature tensor ``R_jklm`` from ``g``, unit covector ``t``."""
    gg = np.einsum("mj,kl->jklm", g, g) - np.einsum("mk,jl->jklm", g, g)
    tt = (
        np.einsum("mj,k,l->jklm", g, t, t)
        - np.einsum("mk,j,l->jklm", g, t, t)
        + np.einsum("kl,m,j->jklm", g, t, t)
        - np.einsum("jl,m,k->jklm", g, t, t)
    )
    return p * gg + q * tt


def _qcc_point(n: int = 4, p: float = 0.3, q: float = 0.7, t=None, g=None, seed: int = 5) -> Fixture:
    g = np.eye(n) if g is None else np.asarray(g, dtype=float)
    t = np.eye(n)[0] if t is None else np.asarray(t, dtype=float)
    t = t / math.sqrt(t @ np.linalg.inv(g) @ t)
    low = qcc_riemann(g, t, p, q)
    ginv = np.linalg.inv(g)
    mixed = np.einsum("jklp,pm->jklm", low, ginv)
    rng = np.random.default_rng(seed)
    b = rng.normal(size=(n, n))
    b = b + b.T
    return Fixture(
        "qcc_point", None, {},
        data={"g": g, "t": t, "p": p, "q": q, "riemann_lower": low, "riemann": mixed, "b": b},
        expected={"qcc": "quasi-constant-curvature compatibility identity holds for any symmetric b"},
    )


def purely_electric_weyl(g: np.ndarray, u: np.ndarray, E: np.ndarray) -> np.ndarray:
    """All-lower Weyl tensor with electric part ``E`` and vanishing magnetic part.

    ``C_abcd = (eps_abpq eps_cdrs - g_abpq g_cdrs) u^p u^r E^qs`` with
    ``g_abcd = g_ac g_bd - g_ad g_bc``; ``u`` is a unit timelike vector and
    ``E`` (upper indices) is symmetric, trace-free and orthogonal to ``u``;
    the sign is chosen so that ``u^j u^m C_jklm`` returns ``E``.
    """
    G = np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g)
    eps = levi_civita(g).values
    A = np.einsum("abpq,cdrs,p,r,qs->abcd", G, G, u, u, E)
    B = np.einsum("abpq,cdrs,p,r,qs->abcd", eps, eps, u, u, E)
    return B - A


def _weyl_compatible_point(seed: int = 3, rho: float = 0.8, pressure: float = 0.25) -> Fixture:
    """Purely electric Weyl tensor with a comoving perfect fluid (Weyl-compatible)."""
    rng = np.random.default_rng(seed)
    g = np.diag([-1.0, 1.0, 1.0, 1.0])
    u = np.array([1.0, 0.0, 0.0, 0.0])
    S = rng.normal(size=(3, 3))
    S = S + S.T
    S -= np.trace(S) / 3 * np.eye(3)
    E = np.zeros((4, 4))
    E[1:, 1:] = S
    weyl = purely_electric_weyl(g, u, E)
    ul = g @ u
    T = (pressure + rho) * np.outer(ul, ul) + pressure * g
    return Fixture(
        "weyl_compatible_point", None, {},
        data={"g": g, "u": u, "E": E, "weyl_lower": weyl, "T": T, "rho": rho, "pressure": pressure},
        expected={"H": "generalized magnetic part vanishes", "commutes": "T commutes with T^jm C_jklm"},
    )


_METRICS = {
    "flat": _flat,
    "minkowski": _minkowski,
    "two_sphere": _two_sphere,
    "polar_plane": _polar_plane,
    "constant_curvature": _constant_curvature,
    "schwarzschild": _schwarzschild,
    "frw": _frw,
    "random": lambda n=3, seed=0, lorentzian=False: random_metric(n, seed, lorentzian),
}
_FIXTURES = {
    "gnomonic_pair": _gnomonic_pair,
    "sinyukov": _sinyukov,
    "genweyl": _genweyl,
    "quasi_codazzi": _quasi_codazzi,
    "qcc_point": _qcc_point,
    "weyl_compatible_point": _weyl_compatible_point,
}


def names() -> list[str]:
    return sorted(_METRICS) + sorted(_FIXTURES)


def catalog(name: str, **params):
    """Return a :class:`ChartedMetric` or :class:`Fixture` by name."""
    if name in _METRICS:
        return _METRICS[name](**params)
    if name in _FIXTURES:
        return _FIXTURES[name](**params)
    raise UnknownCatalogEntry(name)
