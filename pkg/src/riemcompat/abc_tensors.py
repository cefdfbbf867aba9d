"""Curvature tensors built from Riemann, Ricci and scalar curvature ("ABC" tensors).

``K_jkl^m = R_jkl^m + A (d_j^m R_kl - d_k^m R_jl) + B (R_j^m g_kl - R_k^m g_jl)
           + C R (d_j^m g_kl - d_k^m g_jl)``
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

from .compatibility import as_pack, compat_tensor, compat_terms, cyclic3, riemann_divergence
from .curvature import CurvaturePack, TensorField, covariant_derivative
from .errors import DimensionTooSmall, InputError
from .residual import NOT_APPLICABLE, Residual, make_residual
from .tensor import DenseTensor, commutator, jeinsum

Coef = Union[float, TensorField, DenseTensor]

PRESETS = ("weyl", "conharmonic", "projective", "concircular")


@dataclass(frozen=True)
class ABCSpec:
    A: Coef = 0.0
    B: Coef = 0.0
    C: Coef = 0.0
    preset: str = "custom"

    @property
    def constant(self) -> bool:
        return all(isinstance(c, (int, float)) for c in (self.A, self.B, self.C))


def preset(name: str, n: int) -> ABCSpec:
    """Coefficient table of the canonical curvature tensors in dimension ``n``."""
    name = {"conformal": "weyl"}.get(name, name)
    if name in ("weyl", "conharmonic") and n < 3:
        raise DimensionTooSmall(f"{name} tensor needs n >= 3, got {n}")
    if name == "weyl":
        return ABCSpec(1.0 / (n - 2), 1.0 / (n - 2), -1.0 / ((n - 1) * (n - 2)), "weyl")
    if name == "conharmonic":
        return ABCSpec(1.0 / (n - 2), 1.0 / (n - 2), 0.0, "conharmonic")
    if name == "projective":
        if n < 2:
            raise DimensionTooSmall("projective tensor needs n >= 2")
        return ABCSpec(1.0 / (n - 1), 0.0, 0.0, "projective")
    if name == "concircular":
        if n < 2:
            raise DimensionTooSmall("concircular tensor needs n >= 2")
        # A - B = 0 leaves A free; A = B = 0 is the usual concircular tensor.
        return ABCSpec(0.0, 0.0, 1.0 / (n * (n - 1)), "concircular")
    raise InputError(f"unknown preset {name!r}; expected one of {PRESETS}")


def _coef(pack: CurvaturePack, c: Coef):
    if isinstance(c, (int, float)):
        return float(c)
    return pack.field(c)


def abc_tensor(metric, spec: ABCSpec, p=None) -> DenseTensor:
    """``K_jkl^m`` as a jet with the pack's curvature order."""
    pack = as_pack(metric, p)
    n = pack.dim
    if spec.preset in ("weyl", "conharmonic") and n < 3:
        raise DimensionTooSmall(f"{spec.preset} tensor needs n >= 3")
    R = pack.riemann
    ric = pack.ricci
    order = R.order
    g = pack.g.truncate(order)
    delta = DenseTensor.delta(n)
    a_part = jeinsum("mj,kl->jklm", delta, ric)
    a_part = a_part - a_part.permute("kjlm", "jklm")
    b_part = jeinsum("jm,kl->jklm", pack.ricci_mixed, g)
    b_part = b_part - b_part.permute("kjlm", "jklm")
    c_part = jeinsum("mj,kl,->jklm", delta, g, pack.scalar)
    c_part = c_part - c_part.permute("kjlm", "jklm")
    out = R
    for coef, part in ((spec.A, a_part), (spec.B, b_part), (spec.C, c_part)):
        c = _coef(pack, coef)
        if isinstance(c, float):
            if c != 0.0:
                out = out + part * c
        else:
            out = out + part * c
    return out


def abc_lower(k: DenseTensor, g: DenseTensor) -> DenseTensor:
    return jeinsum("jklp,pm->jklm", k, g.truncate(min(g.order, k.order)))


def weyl_tensor(metric, p=None) -> DenseTensor:
    pack = as_pack(metric, p)
    return abc_tensor(pack, preset("weyl", pack.dim))


def _require_constant(spec: ABCSpec):
    if not spec.constant:
        raise InputError("this identity requires constant A, B, C")


def abc_divergence_residual(metric, spec: ABCSpec, p=None) -> Residual:
    pack = as_pack(metric, p)
    _require_constant(spec)
    K = abc_tensor(pack, spec)
    divk = riemann_divergence(pack, K).at_value()
    divr = riemann_divergence(pack).at_value()
    dR = pack.scalar.partials().at_value()
    g = pack.g.at_value()
    grad = jeinsum("kl,j->jkl", g, dR)
    grad = grad - grad.permute("kjl", "jkl")
    rhs1 = divr * (1.0 - spec.A)
    rhs2 = grad * (0.5 * (spec.B + 2.0 * spec.C))
    return make_residual("abc_divergence", "divABC", divk - rhs1 - rhs2, divk, rhs1, rhs2)


def rk_transfer_residual(metric, spec: ABCSpec, b, p=None) -> Residual:
    """K-compatibility sum minus R-compatibility sum minus the Ricci-commutator terms."""
    pack = as_pack(metric, p)
    bt = pack.field(b).at_value()
    K = abc_tensor(pack, spec).at_value()
    kc = compat_tensor(K, bt)
    rc = compat_tensor(pack.riemann.at_value(), bt)
    g = pack.g.at_value()
    F = commutator(bt, pack.ricci.at_value(), pack.ginv.at_value())  # b_im R_j^m - b_jm R_i^m
    corr = (jeinsum("kl,ij->ijkl", g, F) + jeinsum("il,jk->ijkl", g, F) + jeinsum("jl,ki->ijkl", g, F))
    Bv = _coef(pack, spec.B)
    Bv = Bv if isinstance(Bv, float) else Bv.at_value()
    corr = corr * Bv
    return make_residual("abc_transfer", "RK", kc - rc - corr, kc, rc, corr)


def prop66_residual(metric, spec: ABCSpec, p=None, tol: float = 1e-7) -> tuple[Residual, Residual]:
    """Double-divergence identity for ABC tensors and the Ricci K-compatibility it implies.

    The second residual is ``NOT_APPLICABLE`` unless the cyclic double
    divergence of K vanishes to ``tol``.
    """
    pack = as_pack(metric, p)
    _require_constant(spec)
    if spec.A == 1.0:
        raise InputError("A must differ from 1")
    K = abc_tensor(pack, spec)
    div = riemann_divergence(pack, K)
    dd = covariant_derivative(pack, div).at_value()
    lhs_parts = (dd, dd.permute("jkil", "ijkl"), dd.permute("kijl", "ijkl"))
    lhs = lhs_parts[0] + lhs_parts[1] + lhs_parts[2]
    ric = pack.ricci.at_value()
    rterms = compat_terms(pack.riemann.at_value(), ric)
    rhs = (rterms[0] + rterms[1] + rterms[2]) * (-(1.0 - spec.A))
    first = make_residual("abc_double_divergence", "abcxx", lhs - rhs, *lhs_parts, *rterms)
    lhs_only = make_residual("abc_double_divergence_lhs", "prop66", lhs, *lhs_parts)
    kterms = compat_terms(K.at_value(), ric)
    second = make_residual("ricci_k_compatibility", "prop66", kterms[0] + kterms[1] + kterms[2], *kterms,
                           detail={"hypothesis_scaled": lhs_only.scaled_max, "bound": tol / (1.0 - spec.A)})
    if not lhs_only.ok(tol):
        second = replace(second, status=NOT_APPLICABLE,
                         detail={**second.detail, "reason": "double divergence does not vanish"})
    return first, second
