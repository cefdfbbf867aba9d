"""Geodesic mappings: deformation tensor, mapped curvature and compatibility invariance.

A covector ``X`` changes the connection by ``G'^k_ij = G^k_ij + d^k_i X_j + d^k_j X_i``;
curvature then changes through ``P_kl = nabla_k X_l - X_k X_l``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compatibility import as_pack, compat_residual, compat_tensor
from .curvature import ChartedMetric, CurvaturePack, Supplier, TensorField, covariant_derivative
from .errors import AsymmetricDeformation, InputError
from .residual import Residual, make_residual
from .tensor import DenseTensor, jeinsum


@dataclass(frozen=True)
class GeodesicMapData:
    X: DenseTensor
    P: DenseTensor  # [k, l], point value
    closedness: Residual
    christoffel_bar: DenseTensor  # [k, i, j], point value
    symmetry: Residual

    @property
    def closed(self) -> bool:
        return self.closedness.ok(1e-10)


def deformation(metric, X: Supplier, p=None) -> GeodesicMapData:
    pack = as_pack(metric, p)
    Xt = pack.field(X)
    if Xt.variance != ("l",):
        raise InputError("X must be a covector field")
    dX = covariant_derivative(pack, Xt).at_value()
    X0 = Xt.at_value()
    XX = jeinsum("k,l->kl", X0, X0)
    P = dX - XX
    closed = make_residual("X_closedness", "Riemgeod", dX - dX.permute("lk", "kl"), dX)
    sym = make_residual("P_symmetry", "Riemgeod", P - P.permute("lk", "kl"), dX, XX)
    d = DenseTensor.delta(pack.dim)
    gam = pack.christoffel.at_value()
    gbar = gam + jeinsum("ki,j->kij", d, X0) + jeinsum("kj,i->kij", d, X0)
    return GeodesicMapData(Xt, P, closed, gbar, sym)


def _value(t) -> DenseTensor:
    return t.at_value() if isinstance(t, DenseTensor) else DenseTensor.from_values(t, ("l",) * np.ndim(t))


def mapped_riemann(riem: DenseTensor, P, tol: float = 1e-10) -> DenseTensor:
    """``R'_jkl^m = R_jkl^m + d_j^m P_kl - d_k^m P_jl``."""
    riem = riem.at_value()
    P = _value(P)
    asym = P - P.permute("lk", "kl")
    if asym.scale() > tol * max(1.0, P.scale()):
        raise AsymmetricDeformation(f"P is not symmetric (|P - P^T| = {asym.scale():.3e})")
    d = DenseTensor.delta(riem.dim)  # [m, j]
    return riem + jeinsum("mj,kl->jklm", d, P) - jeinsum("mk,jl->jklm", d, P)


def invariance_residual(riem: DenseTensor, P, b) -> Residual:
    """Difference of the compatibility sums of ``R'`` and ``R`` for the same ``b``."""
    riem = riem.at_value()
    b = _value(b)
    before = compat_tensor(riem, b)
    after = compat_tensor(mapped_riemann(riem, P), b)
    return make_residual("geodesic_invariance", "geodesic-Prop", after - before, after, before)


def metric_from_field(field: TensorField, like: ChartedMetric, name: str | None = None) -> ChartedMetric:
    """Read a symmetric (0,2) field as a metric on the chart of ``like``."""
    if field.variance != ("l", "l"):
        raise InputError("metric field must be (0,2)")
    return ChartedMetric(name or field.name, like.coords, dict(field.components), dict(field.params),
                         like.signature, like.domain)


@dataclass(frozen=True)
class PairChecks:
    gbar_compat: Residual
    geog: Residual
    x_recovery: Residual
    link: Residual
    mapped_flatness: Residual

    def all(self) -> dict[str, Residual]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def gbar_compat_check(fixture, p) -> Residual:
    """Compatibility of ``gbar`` with the Riemann tensor of ``g`` at ``p``."""
    return pair_checks(fixture, p).gbar_compat


def pair_checks(fixture, p) -> PairChecks:
    """All link residuals of a geodesically related pair ``(g, gbar, X)``."""
    g, gbar_f, X = fixture.metric, fixture.fields["gbar"], fixture.fields["X"]
    pack = CurvaturePack(g, p)
    bar = CurvaturePack(metric_from_field(gbar_f, g), p)
    n = pack.dim
    gb = pack.field(gbar_f)
    Xt = pack.field(X)

    compat = compat_residual(pack.riemann, gb, anchor="geodesic-Corollary")

    dgb = covariant_derivative(pack, gb).at_value()  # [k, j, l]
    X0, gb0 = Xt.at_value(), gb.at_value()
    rhs = (jeinsum("k,jl->kjl", X0, gb0) * 2 + jeinsum("j,kl->kjl", X0, gb0) + jeinsum("l,kj->kjl", X0, gb0))
    geog = make_residual("geog", "geog", dgb - rhs, dgb, rhs)

    gam, gam_bar = pack.christoffel.at_value(), bar.christoffel.at_value()
    tr = (jeinsum("kjk->j", gam_bar, check=False) - jeinsum("kjk->j", gam, check=False)) / (n + 1)
    x_rec = make_residual("X_recovery", "Riemgeod", tr - X0, X0)

    data = deformation(pack, Xt)
    link = make_residual("christoffel_link", "Riemgeod", gam_bar - data.christoffel_bar, gam_bar)

    rbar = mapped_riemann(pack.riemann, data.P, tol=1e-8)
    flat = make_residual("mapped_riemann", "Riemgeod", rbar - bar.riemann.at_value(), pack.riemann, rbar)
    return PairChecks(compat, geog, x_rec, link, flat)
