"""Einstein-equation wiring, Weyl divergence with sources, and the E/H split.

Signature is ``(-,+,+,+)``.  The stress tensor is read off the metric as
``T = (Ric - R g / 2) / k``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .abc_tensors import weyl_tensor
from .compatibility import as_pack, compat_residual, compat_tensor, cyclic3, riemann_divergence
from .curvature import CurvaturePack, covariant_derivative
from .errors import DimensionNot4, NotLorentzian, NotUnitTimelike
from .residual import Residual, make_residual
from .tensor import DenseTensor, inverse_metric, jeinsum, levi_civita


def _arr(x) -> np.ndarray:
    return np.asarray(getattr(x, "values", x), dtype=float)


def _require_lorentzian(g: np.ndarray):
    ev = np.linalg.eigvalsh(g)
    if int((ev < 0).sum()) != 1 or np.any(np.abs(ev) < 1e-12):
        raise NotLorentzian(f"metric signature at point is not Lorentzian (eigenvalues {ev})")


@dataclass(frozen=True)
class MatterData:
    k: float
    T: DenseTensor  # jet, order of Ricci
    trace: DenseTensor
    einstein: Residual
    trace_relation: Residual


def stress_from_einstein(metric, p=None, k: float = 1.0) -> MatterData:
    pack = as_pack(metric, p)
    _require_lorentzian(pack.g.values)
    n = pack.dim
    ric, R = pack.ricci, pack.scalar
    g = pack.g.truncate(ric.order)
    half_rg = jeinsum(",jl->jl", R, g) * 0.5
    T = (ric - half_rg) / k
    tr = jeinsum("jl,jl->", pack.ginv.truncate(ric.order), T)
    ein = ric.at_value() - half_rg.at_value() - T.at_value() * k
    rel = R.at_value() + tr.at_value() * (2 * k / (n - 2))
    return MatterData(
        k, T, tr,
        make_residual("einstein_relation", "GR", ein, ric.at_value(), half_rg.at_value()),
        make_residual("trace_relation", "GR", rel, R.at_value()),
    )


def weyl_divergence_matter_residual(metric, p=None, k: float = 1.0, trace_sign: int = -1) -> Residual:
    """``nabla_m C_jkl^m`` against its expression through ``nabla T``.

    ``k (n-3)/(n-2) [nabla_k T_jl - nabla_j T_kl - (g_jl d_k T - g_kl d_j T)/(n-1)]``.
    Substituting the Einstein relation into the Cotton form fixes the minus
    sign on the trace term; ``trace_sign=+1`` evaluates the variant with a
    plus sign, which does not vanish on conformally flat fluids.
    """
    pack = as_pack(metric, p)
    n = pack.dim
    md = stress_from_einstein(pack, k=k)
    lhs = riemann_divergence(pack, weyl_tensor(pack)).at_value()
    dT = covariant_derivative(pack, md.T).at_value()  # [k, j, l]
    dtr = md.trace.partials().at_value()
    g = pack.g.at_value()
    bracket = (dT - dT.permute("jkl", "kjl")).permute("kjl", "jkl")
    bracket = bracket + (jeinsum("jl,k->jkl", g, dtr) - jeinsum("kl,j->jkl", g, dtr)) * (trace_sign / (n - 1))
    rhs = bracket * (k * (n - 3) / (n - 2))
    return make_residual("weyl_divergence_matter", "GR-divC", lhs - rhs, lhs, rhs)


def weyl_compat_and_bianchi_like(metric, p=None, k: float = 1.0) -> tuple[Residual, Residual]:
    """Bianchi-like equation for ``nabla nabla C`` and compatibility of ``C`` with ``T``."""
    pack = as_pack(metric, p)
    n = pack.dim
    md = stress_from_einstein(pack, k=k)
    C = weyl_tensor(pack)
    div = riemann_divergence(pack, C)  # [j, k, l]
    ddiv = covariant_derivative(pack, div).at_value()  # [i, j, k, l]
    lhs = cyclic3(ddiv)
    comp = compat_tensor(C.at_value(), md.T.at_value())
    rhs = comp * (-k * (n - 3) / (n - 2))
    first = make_residual("bianchi_like_weyl", "GR-bianchi-like", lhs - rhs, lhs, rhs)
    second = compat_residual(C, md.T, anchor="Weyl-compat")
    return first, second


@dataclass(frozen=True)
class EHPair:
    E: np.ndarray
    H: np.ndarray
    generalized: bool = False

    def residuals(self, u=None, g=None) -> dict[str, Residual]:
        out = {
            "E_symmetry": make_residual("E_symmetry", "GR-EH", self.E - self.E.T, self.E),
            "H_symmetry": make_residual("H_symmetry", "GR-EH", self.H - self.H.T, self.H),
        }
        if u is not None:
            eu = self.E @ np.asarray(u, dtype=float)
            out["E_transverse"] = make_residual("E_transverse", "GR-EH", eu, self.E)
        return out


def eh_decompose(weyl_lower, g, u=None, T=None) -> EHPair:
    """E/H parts of an all-lower Weyl tensor along ``u`` or, generalized, against ``T_jl``."""
    C, g = _arr(weyl_lower), _arr(g)
    if g.shape != (4, 4):
        raise DimensionNot4(f"E/H split needs n = 4, got n = {g.shape[0]}")
    _require_lorentzian(g)
    if (u is None) == (T is None):
        raise ValueError("give exactly one of u or T")
    gi = np.linalg.inv(g)
    if u is not None:
        u = np.asarray(u, dtype=float)
        norm = float(u @ g @ u)
        if abs(norm + 1) > 1e-10:
            raise NotUnitTimelike(f"g(u, u) = {norm!r}, expected -1")
        W = np.outer(u, u)
    else:
        W = gi @ _arr(T) @ gi
    eps = levi_civita(g).values
    Cup = np.einsum("pa,qb,ablm->pqlm", gi, gi, C)
    E = np.einsum("jm,jklm->kl", W, C)
    half = np.einsum("jm,pqjk,pqlm->kl", W, eps, Cup)
    H = 0.25 * (half + half.T)
    return EHPair(E, H, generalized=T is not None)


def electric_magnetic(metric, u, p=None, T=None) -> EHPair:
    pack = as_pack(metric, p, order=2)
    return eh_decompose(weyl_lower_value(pack), pack.g.values, u=u if T is None else None, T=T)


def weyl_lower_value(pack: CurvaturePack) -> np.ndarray:
    C = weyl_tensor(pack).values
    return np.einsum("jklp,pm->jklm", C, pack.g.values)


def weyl_mixed(weyl_lower, g) -> DenseTensor:
    gi = inverse_metric(DenseTensor.from_values(_arr(g), ("l", "l")))
    return jeinsum("jklp,pm->jklm", DenseTensor.from_values(_arr(weyl_lower), ("l",) * 4), gi)


def c_ring(T, weyl_lower, g) -> np.ndarray:
    """``T^jm C_jklm``."""
    gi = np.linalg.inv(_arr(g))
    return np.einsum("jm,jklm->kl", gi @ _arr(T) @ gi, _arr(weyl_lower))


def cring_commutes(T, weyl_lower, g) -> Residual:
    """Commutator ``T_k^p Cr_pl - Cr_k^p T_pl`` of ``T`` and ``T^jm C_jklm``."""
    T, g = _arr(T), _arr(g)
    Cr = c_ring(T, weyl_lower, g)
    gi = np.linalg.inv(g)
    a, b = T @ gi @ Cr, Cr @ gi @ T
    return make_residual("cring_commutator", "GR-Cring", a - b, a, b)


def weyl_compat_point(T, weyl_lower, g) -> Residual:
    C = weyl_mixed(weyl_lower, g)
    return compat_residual(C, DenseTensor.from_values(_arr(T), ("l", "l")), anchor="Weyl-compat")


def is_static(pack: CurvaturePack, tol: float = 1e-12) -> bool:
    """``g_0i = 0`` and ``d_0 g = 0`` at the point (coordinate 0 is time)."""
    g = pack.g.values
    dg = pack.g.partials().values  # [k, i, j]
    scale = max(1.0, float(np.abs(g).max()))
    return bool(np.abs(g[0, 1:]).max() <= tol * scale and np.abs(dg[0]).max() <= tol * scale)
