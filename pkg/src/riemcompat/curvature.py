"""Charted metrics, expression-backed tensor fields, and curvature in jet mode.

Convention (fixed by :func:`riemcompat.compatibility.calibrate_sign`)::

    R_{jkl}^m = s * (d_j G^m_{kl} - d_k G^m_{jl} + G^m_{jp} G^p_{kl} - G^m_{kp} G^p_{jl})
    R_{kl}    = R_{kml}^m,     R = g^{kl} R_{kl}

with ``s = RIEMANN_SIGN``.  Arrays for ``R_{jkl}^m`` are indexed ``[j, k, l, m]``
and the Christoffel symbols ``G^m_{jk}`` are indexed ``[m, j, k]``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .errors import InputError, JetBudgetExceeded, SingularMetric
from .expr import Expr, eval_jet, parse
from .jets import MAX_ORDER, ncoef
from .tensor import DOWN, UP, DenseTensor, inverse_metric, jeinsum

# Sign making the deviation-Bianchi identity hold; see calibrate_sign.
RIEMANN_SIGN = -1

_LETTERS = "bcdefghi"


def _parse_components(raw: Mapping, coords, params, rank: int, symmetric: bool) -> dict:
    comps: dict[tuple[int, ...], Expr] = {}
    for key, src in raw.items():
        idx = tuple(key) if not isinstance(key, str) else tuple(int(t) for t in key.split("_")[1:])
        if len(idx) != rank:
            raise InputError(f"component key {key!r} does not have {rank} indices")
        if any(not 0 <= i < len(coords) for i in idx):
            raise InputError(f"component key {key!r} out of range")
        if symmetric:
            idx = tuple(sorted(idx))
        comps[idx] = src if isinstance(src, Expr) else parse(str(src), coords, params)
    return comps


@dataclass(frozen=True)
class ChartedMetric:
    """A metric on one coordinate chart: component expressions plus a domain box."""

    name: str
    coords: tuple[str, ...]
    components: dict
    params: dict = field(default_factory=dict)
    signature: tuple[int, ...] = ()
    domain: tuple[tuple[float, float], ...] = ()

    @classmethod
    def build(cls, name, coords, components, params=None, signature=None, domain=None):
        """Parse ``components`` given as ``{"g_i_j": text}`` or ``{(i, j): text}``."""
        coords = tuple(coords)
        params = dict(params or {})
        n = len(coords)
        comps = _parse_components(components, coords, tuple(params), 2, True)
        signature = tuple(signature) if signature else (1,) * n
        domain = tuple(tuple(map(float, d)) for d in domain) if domain else ((-1.0, 1.0),) * n
        if len(signature) != n or len(domain) != n:
            raise InputError("signature/domain length must equal the number of coordinates")
        return cls(name, coords, comps, params, signature, domain)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def jet(self, p, order: int) -> DenseTensor:
        n = self.dim
        data = np.zeros((n, n, ncoef(n, order)))
        for (i, j), e in self.components.items():
            c = eval_jet(e, p, order, self.params).coeffs
            data[i, j] = c
            data[j, i] = c
        return DenseTensor(data, (DOWN, DOWN), n, order)

    def value(self, p) -> np.ndarray:
        return self.jet(p, 0).values

    def check_point(self, p) -> None:
        """Signature/invertibility check at one point."""
        g = self.value(p)
        if abs(np.linalg.det(g)) < 1e-12:
            raise SingularMetric(f"metric {self.name!r} degenerate at {list(p)}")
        neg = int(np.sum(np.linalg.eigvalsh(g) < 0))
        if neg != sum(1 for s in self.signature if s < 0):
            raise InputError(f"metric {self.name!r} has {neg} negative eigenvalues at {list(p)}, signature {self.signature}")

    @property
    def lorentzian(self) -> bool:
        return sum(1 for s in self.signature if s < 0) == 1

    @property
    def riemannian(self) -> bool:
        return all(s > 0 for s in self.signature)


@dataclass(frozen=True)
class TensorField:
    """Expression-backed tensor field on a metric's chart (absent components are 0)."""

    name: str
    variance: tuple[str, ...]
    coords: tuple[str, ...]
    components: dict
    params: dict = field(default_factory=dict)
    symmetric: bool = True

    @classmethod
    def build(cls, name, variance, coords, components, params=None, symmetric=None):
        variance = tuple(variance)
        coords = tuple(coords)
        params = dict(params or {})
        if symmetric is None:
            symmetric = len(variance) == 2
        comps = _parse_components(components, coords, tuple(params), len(variance), symmetric)
        return cls(name, variance, coords, comps, params, symmetric)

    @classmethod
    def scalar(cls, name, coords, source, params=None):
        return cls.build(name, (), coords, {(): source}, params)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def jet(self, p, order: int) -> DenseTensor:
        n = self.dim
        r = len(self.variance)
        data = np.zeros((n,) * r + (ncoef(n, order),))
        for idx, e in self.components.items():
            c = eval_jet(e, p, order, self.params).coeffs
            if self.symmetric:
                for perm in set(itertools.permutations(idx)):
                    data[perm] = c
            else:
                data[idx] = c
        return DenseTensor(data, self.variance, n, order)


Supplier = Union[TensorField, DenseTensor, Callable[["CurvaturePack"], DenseTensor]]


class CurvaturePack:
    """Metric jet at a point with lazily assembled connection and curvature.

    ``order`` is the metric jet order; the Christoffel symbols carry
    ``order - 1``, the curvature tensors ``order - 2``.
    """

    def __init__(self, metric: ChartedMetric, point, order: int = MAX_ORDER, sign: int = RIEMANN_SIGN):
        if not 0 <= order <= MAX_ORDER:
            raise JetBudgetExceeded(f"metric jet order {order} outside 0..{MAX_ORDER}")
        self.metric = metric
        self.point = tuple(float(x) for x in np.asarray(point, dtype=float).ravel())
        self.order = order
        self.sign = sign
        self.dim = metric.dim

    @cached_property
    def g(self) -> DenseTensor:
        return self.metric.jet(self.point, self.order)

    @cached_property
    def ginv(self) -> DenseTensor:
        return inverse_metric(self.g)

    @cached_property
    def christoffel(self) -> DenseTensor:
        """``G^m_{jk}`` indexed ``[m, j, k]``."""
        if self.order < 1:
            raise JetBudgetExceeded("Christoffel symbols need metric jet order >= 1")
        dg = self.g.partials()  # [a, b, c] = d_a g_bc
        low = (dg.permute("jlk", "ljk") + dg.permute("klj", "ljk") - dg) * 0.5
        return jeinsum("ml,ljk->mjk", self.ginv, low)

    @cached_property
    def riemann(self) -> DenseTensor:
        """``R_{jkl}^m`` indexed ``[j, k, l, m]``."""
        if self.order < 2:
            raise JetBudgetExceeded("Riemann tensor needs metric jet order >= 2")
        gam = self.christoffel
        dgam = gam.partials()  # [a, m, j, k] = d_a G^m_{jk}
        g1 = gam.truncate(dgam.order)
        deriv = dgam.permute("jmkl", "jklm")
        quad = jeinsum("mjp,pkl->jklm", g1, g1)
        r = deriv - deriv.permute("jklm", "kjlm") + quad - quad.permute("jklm", "kjlm")
        return r * float(self.sign)

    @cached_property
    def riemann_lower(self) -> DenseTensor:
        """``R_{jklm} = R_{jkl}^p g_{pm}``."""
        return jeinsum("jklp,pm->jklm", self.riemann, self.g)

    @cached_property
    def ricci(self) -> DenseTensor:
        return jeinsum("kmlm->kl", self.riemann, check=False)

    @cached_property
    def ricci_mixed(self) -> DenseTensor:
        """``R_k^m`` indexed ``[k, m]``."""
        return jeinsum("kl,lm->km", self.ricci, self.ginv)

    @cached_property
    def scalar(self) -> DenseTensor:
        return jeinsum("kl,kl->", self.ginv, self.ricci)

    def field(self, f: Supplier) -> DenseTensor:
        """Evaluate a field supplier at this point with the pack's jet order."""
        if isinstance(f, DenseTensor):
            return f
        if isinstance(f, TensorField):
            if f.dim != self.dim:
                raise InputError(f"field {f.name!r} has dimension {f.dim}, metric {self.dim}")
            return f.jet(self.point, self.order)
        return f(self)

    def nabla(self, t: DenseTensor, k: int = 1) -> DenseTensor:
        return covariant_derivative(self, t, k)


def covariant_derivative(pack: CurvaturePack, t: Supplier, k: int = 1) -> DenseTensor:
    """Apply the Levi-Civita derivative ``k`` times; new slots are prepended."""
    t = pack.field(t)
    for _ in range(k):
        t = _nabla_once(pack, t)
    return t


def _nabla_once(pack: CurvaturePack, t: DenseTensor) -> DenseTensor:
    if t.order == 0:
        raise JetBudgetExceeded(f"tensor {t!r} has no jet budget for another derivative")
    out = t.partials()
    gam = pack.christoffel.truncate(t.order - 1)
    body = _LETTERS[: t.rank]
    for s, ch in enumerate(body):
        src = body[:s] + "p" + body[s + 1 :]
        if t.variance[s] == UP:
            out = out + jeinsum(f"{ch}ap,{src}->a{body}", gam, t)
        else:
            out = out - jeinsum(f"pa{ch},{src}->a{body}", gam, t)
    return out


def curvature_pack(metric: ChartedMetric, p, order: int = MAX_ORDER, sign: int = RIEMANN_SIGN) -> CurvaturePack:
    return CurvaturePack(metric, p, order, sign)


def christoffel(metric: ChartedMetric, p, jet_budget: int = 0) -> DenseTensor:
    return CurvaturePack(metric, p, jet_budget + 1).christoffel


def riemann(metric: ChartedMetric, p, jet_budget: int = 0) -> DenseTensor:
    return CurvaturePack(metric, p, jet_budget + 2).riemann


def ricci(metric: ChartedMetric, p, jet_budget: int = 0) -> DenseTensor:
    return CurvaturePack(metric, p, jet_budget + 2).ricci


def scalar_curvature(metric: ChartedMetric, p, jet_budget: int = 0) -> DenseTensor:
    return CurvaturePack(metric, p, jet_budget + 2).scalar
