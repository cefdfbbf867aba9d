"""O(n) decomposition of the covariant derivative of a symmetric tensor.

``nabla_j b_kl = B0_jkl + A_j g_kl + B_k g_jl + B_l g_jk`` with traceless
``B0``, and ``C_jkl = C0_jkl + lambda_j g_kl - lambda_k g_jl`` for the Codazzi
deviation.  Also hosts the residuals of the differential structures that
imply compatibility (gauged Codazzi, weakly symmetric, Sinyukov, ...).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compatibility import as_pack, codazzi_deviation, compat_tensor, riemann_divergence
from .curvature import CurvaturePack, Supplier, covariant_derivative
from .errors import DimensionTooSmall, MissingField
from .residual import Residual, make_residual
from .tensor import DenseTensor, jeinsum
from .abc_tensors import weyl_tensor


@dataclass(frozen=True)
class NablaBParts:
    grad: DenseTensor  # nabla_j b_kl
    g: DenseTensor
    ginv: DenseTensor
    trace_grad: DenseTensor  # nabla_j b^m_m
    div: DenseTensor  # nabla_m b^m_j
    B0: DenseTensor
    A: DenseTensor
    B: DenseTensor
    cyc: DenseTensor
    skew1: DenseTensor
    skew2: DenseTensor
    deviation: DenseTensor
    lam: DenseTensor
    C0: DenseTensor

    @property
    def dim(self) -> int:
        return self.g.dim

    def reconstruct(self) -> DenseTensor:
        return self.B0 + _trace_pattern(self.A, self.B, self.g)


def _trace_pattern(A: DenseTensor, B: DenseTensor, g: DenseTensor) -> DenseTensor:
    """``A_j g_kl + B_k g_jl + B_l g_jk``."""
    return jeinsum("j,kl->jkl", A, g) + jeinsum("k,jl->jkl", B, g) + jeinsum("l,jk->jkl", B, g)


def _wedge_g(lam: DenseTensor, g: DenseTensor) -> DenseTensor:
    """``lam_j g_kl - lam_k g_jl``."""
    t = jeinsum("j,kl->jkl", lam, g)
    return t - t.permute("kjl", "jkl")


def decompose_gradient(grad: DenseTensor, g: DenseTensor, ginv: DenseTensor) -> NablaBParts:
    """Split a ``nabla_j b_kl``-shaped tensor (symmetric in its last two slots)."""
    n = grad.dim
    if n < 2:
        raise DimensionTooSmall("decomposition needs n >= 2")
    order = grad.order
    g, ginv = g.truncate(order), ginv.truncate(order)
    tr = jeinsum("ml,jlm->j", ginv, grad)
    div = jeinsum("mk,mkj->j", ginv, grad)
    den = n * n + n - 2
    A = (tr * (n + 1) - div * 2) / den
    B = -(tr - div * n) / den
    B0 = grad - _trace_pattern(A, B, g)
    cyc = (B0 + B0.permute("klj", "jkl") + B0.permute("ljk", "jkl")) / 3
    skew1 = (B0 - B0.permute("kjl", "jkl")) / 3
    skew2 = (B0.permute("jlk", "jkl") - B0.permute("ljk", "jkl")) / 3
    dev = grad - grad.permute("kjl", "jkl")
    lam = (tr - div) / (n - 1)
    C0 = dev - _wedge_g(lam, g)
    return NablaBParts(grad, g, ginv, tr, div, B0, A, B, cyc, skew1, skew2, dev, lam, C0)


def nabla_b_decompose(metric, b: Supplier, p=None) -> NablaBParts:
    pack = as_pack(metric, p)
    return decompose_gradient(covariant_derivative(pack, b), pack.g, pack.ginv)


def reconstruction_residual(parts: NablaBParts) -> Residual:
    rec = parts.reconstruct()
    return make_residual("nabla_b_reconstruction", "Codazzi-decomposition", parts.grad.at_value() - rec.at_value(), parts.grad)


def trace_residuals(parts: NablaBParts) -> dict[str, Residual]:
    gi = parts.ginv.at_value()
    B0 = parts.B0.at_value()
    C0 = parts.C0.at_value()
    out = {
        "B0_first": make_residual("B0_trace_first", "Codazzi-decomposition", jeinsum("jl,jkl->k", gi, B0), parts.grad),
        "B0_last": make_residual("B0_trace_last", "Codazzi-decomposition", jeinsum("kl,jkl->j", gi, B0), parts.grad),
        "C0_first": make_residual("C0_trace_first", "tracelessC", jeinsum("jl,jkl->k", gi, C0), parts.deviation),
        "C0_last": make_residual("C0_trace_last", "tracelessC", jeinsum("kl,jkl->j", gi, C0), parts.deviation),
    }
    rec = parts.C0.at_value() + _wedge_g(parts.lam.at_value(), parts.g.at_value())
    out["C_reconstruction"] = make_residual("C_reconstruction", "tracelessC", parts.deviation.at_value() - rec, parts.deviation)
    return out


def inner(x: DenseTensor, y: DenseTensor, ginv: DenseTensor) -> float:
    """Full contraction of two all-lower rank-3 tensors with the inverse metric."""
    gi = ginv.at_value()
    return float(jeinsum("abc,ap,bq,cr,pqr->", x.at_value(), gi, gi, gi, y.at_value()).values)


def orthogonality_residuals(parts: NablaBParts) -> dict[str, Residual]:
    """Normalized inner products between the pieces of ``B0``.

    The cyclic part is orthogonal to each skew part and to their sum.  The two
    skew parts are *not* orthogonal to each other in general; that pair is
    reported for inspection only.
    """
    pieces = {"cyc": parts.cyc, "skew1": parts.skew1, "skew2": parts.skew2,
              "skew": parts.skew1 + parts.skew2}
    norms = {k: abs(inner(v, v, parts.ginv)) for k, v in pieces.items()}
    out = {}
    for a, b in (("cyc", "skew1"), ("cyc", "skew2"), ("cyc", "skew"), ("skew1", "skew2")):
        ip = inner(pieces[a], pieces[b], parts.ginv)
        scale = max(1.0, (norms[a] * norms[b]) ** 0.5)
        out[f"{a}_{b}"] = Residual(f"orthogonal_{a}_{b}", "Codazzi-decomposition", np.array([ip]), scale)
    return out


SUBSPACES = ("Trivial", "I", "A", "B", "I+A", "I+B")


def classify_subspace(parts: NablaBParts, tol: float = 1e-9) -> dict[str, bool]:
    """Membership flags of ``nabla b`` in the invariant subspaces."""
    n = parts.dim
    grad, g = parts.grad.at_value(), parts.g.at_value()
    tr, div = parts.trace_grad.at_value(), parts.div.at_value()
    s = max(1.0, grad.scale())

    def small(t: DenseTensor) -> bool:
        return t.scale() <= tol * s

    traceless = small(parts.A.at_value()) and small(parts.B.at_value())
    cyclic = grad + grad.permute("klj", "jkl") + grad.permute("ljk", "jkl")
    adj_a = grad - jeinsum("j,kl->jkl", (tr + div * 2) / (n + 2), g)
    adj_b = grad - jeinsum("j,kl->jkl", (tr - div) / (n - 1), g)
    return {
        "Trivial": small(grad),
        "I": small(parts.B0.at_value()),
        "A": traceless and small(cyclic),
        "B": traceless and small(parts.deviation.at_value()),
        "I+A": small(adj_a + adj_a.permute("klj", "jkl") + adj_a.permute("ljk", "jkl")),
        "I+B": small(adj_b - adj_b.permute("kjl", "jkl")),
    }


def ricci_weyl_residual(metric, p=None) -> Residual:
    """Deviation of the Ricci tensor against the Weyl divergence and scalar gradient."""
    pack = as_pack(metric, p)
    n = pack.dim
    if n <= 3:
        raise DimensionTooSmall(f"Ricci-Weyl relation needs n >= 4, got {n}")
    lhs = codazzi_deviation(pack, pack.ricci).at_value()
    divc = riemann_divergence(pack, weyl_tensor(pack)).at_value()
    dR = pack.scalar.partials().at_value()
    grad = _wedge_g(dR, pack.g.at_value()) / (2 * (n - 1))
    t1 = divc * (-(n - 2) / (n - 3))
    return make_residual("ricci_weyl", "RicciWeyl", lhs - t1 - grad, lhs, t1, grad)


def transvection_residual(metric, b: Supplier, p=None) -> Residual:
    """``g^kl`` times the compatibility sum equals ``nabla^l C0_ijl + (n-2) d lambda_ij``."""
    pack = as_pack(metric, p)
    n = pack.dim
    bt = pack.field(b)
    parts = decompose_gradient(covariant_derivative(pack, bt), pack.g, pack.ginv)
    comp = compat_tensor(pack.riemann.at_value(), bt.at_value())
    lhs = jeinsum("kl,ijkl->ij", pack.ginv.at_value(), comp)
    dC0 = covariant_derivative(pack, parts.C0).at_value()  # [k, i, j, l]
    div = jeinsum("kl,kijl->ij", pack.ginv.at_value(), dC0)
    dl = covariant_derivative(pack, parts.lam).at_value()
    closed = (dl - dl.permute("ji", "ij")) * (n - 2)
    return make_residual("compat_transvection", "nablaCprime", lhs - div - closed, lhs, div, closed)


def deviation_split_residual(metric, b: Supplier, p=None) -> Residual:
    """Compatibility sum against the cyclic ``nabla C0`` sum plus the ``d lambda`` terms."""
    pack = as_pack(metric, p)
    bt = pack.field(b)
    parts = decompose_gradient(covariant_derivative(pack, bt), pack.g, pack.ginv)
    comp = compat_tensor(pack.riemann.at_value(), bt.at_value())
    dC0 = covariant_derivative(pack, parts.C0).at_value()
    cyc = dC0 + dC0.permute("jkil", "ijkl") + dC0.permute("kijl", "ijkl")
    dl = covariant_derivative(pack, parts.lam).at_value()
    w = dl - dl.permute("ji", "ij")
    g = pack.g.at_value()
    lam_terms = jeinsum("il,jk->ijkl", g, w) + jeinsum("jl,ki->ijkl", g, w) + jeinsum("kl,ij->ijkl", g, w)
    return make_residual("compat_deviation_split", "nablaCprime", comp - cyc - lam_terms, comp, cyc, lam_terms)


STRUCTURES = ("quasi_codazzi", "weakly_symmetric", "genweyl", "closedness", "nablabg",
              "pseudo_k_symmetric", "sinyukov", "concircular")
_NEEDS = {
    "quasi_codazzi": ("beta",),
    "weakly_symmetric": ("A", "B", "D"),
    "nablabg": ("A", "B"),
    "pseudo_k_symmetric": ("K", "A"),
    "sinyukov": ("phi",),
    "concircular": ("A", "gamma"),
    "genweyl": (),
    "closedness": (),
}


def structure_residuals(metric, b: Supplier, p=None, checks=None, **fields) -> dict[str, Residual]:
    """Residuals of the requested structure equations.

    ``fields`` may carry covectors ``beta, A, B, D``, scalars ``phi, gamma`` and a
    ``K`` supplier returning a ``(l,l,l,u)`` jet.  Without ``checks`` every
    structure whose fields are present is evaluated.
    """
    pack = as_pack(metric, p)
    avail = {k for k, v in fields.items() if v is not None}
    if checks is None:
        checks = [c for c in STRUCTURES if set(_NEEDS[c]) <= avail]
    bt = pack.field(b)
    db = covariant_derivative(pack, bt)
    g = pack.g
    out = {}
    for name in checks:
        missing = [f for f in _NEEDS[name] if f not in avail]
        if missing:
            raise MissingField(f"structure {name!r} needs fields {missing}")
        F = {k: pack.field(fields[k]) for k in _NEEDS[name]}
        out[name] = _STRUCTURE_FUNCS[name](pack, bt, db, g, F)
    return out


def _r_quasi_codazzi(pack, bt, db, g, F):
    beta = F["beta"]
    t = db - jeinsum("j,kl->jkl", beta, bt)
    diff = (t - t.permute("kjl", "jkl")).at_value()
    return make_residual("quasi_codazzi", "gauge", diff, db, jeinsum("j,kl->jkl", beta, bt))


def _r_weakly(pack, bt, db, g, F):
    rhs = (jeinsum("i,kl->ikl", F["A"], bt) + jeinsum("k,il->ikl", F["B"], bt) + jeinsum("l,ik->ikl", F["D"], bt))
    return make_residual("weakly_symmetric", "wb", (db - rhs).at_value(), db, rhs)


def _r_genweyl(pack, bt, db, g, F):
    parts = decompose_gradient(db, g, pack.ginv)
    w = _wedge_g(parts.lam, g)
    return make_residual("genweyl", "genWeyl", (parts.deviation - w).at_value(), parts.deviation, w)


def _r_closed(pack, bt, db, g, F):
    parts = decompose_gradient(db, g, pack.ginv)
    dl = covariant_derivative(pack, parts.lam).at_value()
    return make_residual("lambda_closedness", "genWeyl", dl - dl.permute("ji", "ij"), dl)


def _r_nablabg(pack, bt, db, g, F):
    rhs = _trace_pattern(F["A"], F["B"], g)
    return make_residual("nablabg", "nablabg", (db - rhs).at_value(), db, rhs)


def _r_pseudo_k(pack, bt, db, g, F):
    K, A = F["K"], F["A"]
    dK = covariant_derivative(pack, K).at_value()
    K0, A0 = K.at_value(), A.at_value()
    Au = jeinsum("mn,n->m", pack.ginv.at_value(), A0)
    klow = jeinsum("jklp,pi->jkli", K0, g.at_value())
    rhs = (jeinsum("i,jklm->ijklm", A0, K0) * 2
           + jeinsum("j,iklm->ijklm", A0, K0)
           + jeinsum("k,jilm->ijklm", A0, K0)
           + jeinsum("l,jkim->ijklm", A0, K0)
           + jeinsum("m,jkli->ijklm", Au, klow))
    return make_residual("pseudo_k_symmetric", "pseudoK", dK - rhs, dK, rhs)


def _r_sinyukov(pack, bt, db, g, F):
    dphi = F["phi"].partials()
    rhs = jeinsum("kl,j->kjl", g, dphi) + jeinsum("kj,l->kjl", g, dphi)
    return make_residual("sinyukov", "Sinyukov", (db - rhs).at_value(), db, rhs)


def _r_concircular(pack, bt, db, g, F):
    A = F["A"]
    dA = covariant_derivative(pack, A).at_value()
    rhs = jeinsum("i,m->im", A.at_value(), A.at_value()) + jeinsum("im,->im", g.at_value(), F["gamma"].at_value())
    return make_residual("concircular", "pseudoK", dA - rhs, dA, rhs)


_STRUCTURE_FUNCS = {
    "quasi_codazzi": _r_quasi_codazzi,
    "weakly_symmetric": _r_weakly,
    "genweyl": _r_genweyl,
    "closedness": _r_closed,
    "nablabg": _r_nablabg,
    "pseudo_k_symmetric": _r_pseudo_k,
    "sinyukov": _r_sinyukov,
    "concircular": _r_concircular,
}
