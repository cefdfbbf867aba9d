"""Dense tensors at a point with per-slot variance and jet-valued entries.

Every component carries its Taylor jet along a trailing coefficient axis, so
``data.shape == (n,) * rank + (K,)`` with ``K = ncoef(n, order)``.  Plain real
tensors are order-0 jets (``K == 1``).  All products go through
:func:`jeinsum`, which multiplies coefficient series exactly; downstream
modules therefore get covariant derivatives of derived tensors for free.
"""
from __future__ import annotations

import itertools
import math
import string
from typing import Sequence

import numpy as np

from .errors import JetBudgetExceeded, ShapeMismatch, SingularMetric, VarianceMismatch
from .jets import basis, ncoef

UP, DOWN = "u", "l"
_LETTERS = string.ascii_lowercase
_SING_TOL = 1e-12


class DenseTensor:
    """Tensor value (optionally a jet) at one chart point."""

    __slots__ = ("data", "variance", "dim", "order")

    def __init__(self, data: np.ndarray, variance: Sequence[str], dim: int, order: int = 0):
        variance = tuple(variance)
        data = np.asarray(data, dtype=float)
        expected = (dim,) * len(variance) + (ncoef(dim, order),)
        if data.shape != expected:
            raise ShapeMismatch(f"data shape {data.shape} does not match {expected}")
        if any(v not in (UP, DOWN) for v in variance):
            raise ValueError(f"variance entries must be 'u' or 'l': {variance}")
        self.data = data
        self.variance = variance
        self.dim = dim
        self.order = order

    # -- construction -------------------------------------------------------
    @classmethod
    def from_values(cls, values, variance: Sequence[str], dim: int | None = None) -> "DenseTensor":
        values = np.asarray(values, dtype=float)
        if dim is None:
            if values.ndim == 0:
                raise ValueError("dim is required for scalars")
            dim = values.shape[0]
        return cls(values[..., None], variance, dim, 0)

    @classmethod
    def scalar(cls, value: float, dim: int) -> "DenseTensor":
        return cls(np.array([float(value)]), (), dim, 0)

    @classmethod
    def delta(cls, dim: int) -> "DenseTensor":
        return cls.from_values(np.eye(dim), (UP, DOWN))

    @classmethod
    def zeros(cls, variance: Sequence[str], dim: int, order: int = 0) -> "DenseTensor":
        shape = (dim,) * len(variance) + (ncoef(dim, order),)
        return cls(np.zeros(shape), variance, dim, order)

    # -- views --------------------------------------------------------------
    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def values(self) -> np.ndarray:
        return self.data[..., 0]

    def scale(self) -> float:
        v = self.values
        return float(np.max(np.abs(v))) if v.size else 0.0

    def __repr__(self) -> str:
        return f"DenseTensor(variance={''.join(self.variance)!r}, dim={self.dim}, order={self.order})"

    # -- jet manipulation ---------------------------------------------------
    def truncate(self, order: int) -> "DenseTensor":
        if order == self.order:
            return self
        if order > self.order:
            raise JetBudgetExceeded(f"tensor carries jet order {self.order}, {order} requested")
        k = ncoef(self.dim, order)
        return DenseTensor(self.data[..., :k], self.variance, self.dim, order)

    def at_value(self) -> "DenseTensor":
        return self.truncate(0)

    def partials(self) -> "DenseTensor":
        """Coordinate partial derivatives; prepends a lower slot, lowers order by one."""
        if self.order == 0:
            raise JetBudgetExceeded("no jet budget left for a derivative")
        b = basis(self.dim, self.order)
        d = np.stack([self.data[..., b.deriv_src[j]] * b.deriv_fac[j] for j in range(self.dim)])
        return DenseTensor(d, (DOWN,) + self.variance, self.dim, self.order - 1)

    # -- linear algebra -----------------------------------------------------
    def _align(self, other: "DenseTensor"):
        if not isinstance(other, DenseTensor):
            raise TypeError(f"cannot combine DenseTensor with {type(other).__name__}")
        if other.variance != self.variance or other.dim != self.dim:
            raise VarianceMismatch(f"{self.variance} vs {other.variance}")
        order = min(self.order, other.order)
        return self.truncate(order), other.truncate(order), order

    def __add__(self, other):
        a, b, order = self._align(other)
        return DenseTensor(a.data + b.data, self.variance, self.dim, order)

    def __sub__(self, other):
        a, b, order = self._align(other)
        return DenseTensor(a.data - b.data, self.variance, self.dim, order)

    def __neg__(self):
        return DenseTensor(-self.data, self.variance, self.dim, self.order)

    def __mul__(self, c):
        if isinstance(c, DenseTensor):
            if c.rank != 0:
                raise TypeError("use jeinsum for tensor products")
            sub = _LETTERS[: self.rank]
            return jeinsum(f"{sub},->{sub}", self, c)
        return DenseTensor(self.data * float(c), self.variance, self.dim, self.order)

    __rmul__ = __mul__

    def __truediv__(self, c: float):
        return DenseTensor(self.data / float(c), self.variance, self.dim, self.order)

    def permute(self, source: str, target: str) -> "DenseTensor":
        """Relabel slots: ``t.permute('jkl', 'kjl')`` swaps the first two slots."""
        return jeinsum(f"{source}->{target}", self, check=False)


def _output_variance(inputs, operands, out):
    var = []
    for ch in out:
        for sub, op in zip(inputs, operands):
            if ch in sub:
                var.append(op.variance[sub.index(ch)])
                break
        else:
            raise ValueError(f"output index {ch!r} not present in inputs")
    return tuple(var)


def _check_pairs(inputs, operands, out):
    seen: dict[str, list[str]] = {}
    for sub, op in zip(inputs, operands):
        for ch, v in zip(sub, op.variance):
            seen.setdefault(ch, []).append(v)
    for ch, vs in seen.items():
        if ch in out:
            continue
        if len(vs) != 2 or vs[0] == vs[1]:
            raise VarianceMismatch(f"summed index {ch!r} has variances {vs}")


def _product(sa: str, a: DenseTensor, sb: str, b: DenseTensor, so: str) -> DenseTensor:
    var = _output_variance((sa, sb), (a, b), so)
    n = a.dim
    if a.order == 0 or b.order == 0:
        order = max(a.order, b.order)
        if a.order == 0 and b.order == 0:
            data = np.einsum(f"{sa}Z,{sb}->{so}Z", a.data, b.data[..., 0])
        elif a.order == 0:
            data = np.einsum(f"{sa},{sb}Z->{so}Z", a.data[..., 0], b.data)
        else:
            data = np.einsum(f"{sa}Z,{sb}->{so}Z", a.data, b.data[..., 0])
        return DenseTensor(data, var, n, order)
    order = min(a.order, b.order)
    a, b = a.truncate(order), b.truncate(order)
    bs = basis(n, order)
    pairs = np.einsum(f"{sa}Y,{sb}Y->{so}Y", a.data[..., bs.lhs], b.data[..., bs.rhs], optimize=True)
    return DenseTensor(pairs @ bs.scatter, var, n, order)


def jeinsum(subscripts: str, *operands: DenseTensor, check: bool = True) -> DenseTensor:
    """Einstein summation over tensor slots with exact jet multiplication.

    Subscripts use lowercase letters.  The output variance is read off from the
    operands; with ``check`` every summed index must pair an upper with a lower
    slot.
    """
    lhs, out = subscripts.replace(" ", "").split("->")
    inputs = lhs.split(",")
    if len(inputs) != len(operands):
        raise ValueError("subscripts/operands count mismatch")
    for sub, op in zip(inputs, operands):
        if len(sub) != op.rank:
            raise ShapeMismatch(f"subscript {sub!r} for rank-{op.rank} operand")
    dims = {op.dim for op in operands}
    if len(dims) != 1:
        raise ShapeMismatch(f"operands of different dimension {dims}")
    if check:
        _check_pairs(inputs, operands, out)
    if len(operands) == 1:
        (a,) = operands
        var = _output_variance(inputs, operands, out)
        return DenseTensor(np.einsum(f"{inputs[0]}Z->{out}Z", a.data), var, a.dim, a.order)
    acc_sub, acc = inputs[0], operands[0]
    for k in range(1, len(operands)):
        later = out + "".join(inputs[k + 1 :])
        nxt = inputs[k]
        keep = "".join(dict.fromkeys(ch for ch in acc_sub + nxt if ch in later))
        acc = _product(acc_sub, acc, nxt, operands[k], keep)
        acc_sub = keep
    if acc_sub != out:
        acc = DenseTensor(np.einsum(f"{acc_sub}Z->{out}Z", acc.data), _output_variance([acc_sub], [acc], out), acc.dim, acc.order)
    return acc


# -- spec operations --------------------------------------------------------

def contract(t: DenseTensor, slot_a: int, slot_b: int) -> DenseTensor:
    """Trace over two slots of opposite variance."""
    if t.variance[slot_a] == t.variance[slot_b]:
        raise VarianceMismatch(f"slots {slot_a} and {slot_b} are both {t.variance[slot_a]!r}")
    sub = list(_LETTERS[: t.rank])
    sub[slot_b] = sub[slot_a]
    out = "".join(c for i, c in enumerate(sub) if i not in (slot_a, slot_b))
    return jeinsum(f"{''.join(sub)}->{out}", t, check=False)


def _check_metric(g: DenseTensor):
    if abs(np.linalg.det(g.values)) < _SING_TOL:
        raise SingularMetric(f"|det g| = {abs(np.linalg.det(g.values)):.3e}")


def raise_index(t: DenseTensor, slot: int, g_inv: DenseTensor) -> DenseTensor:
    if t.variance[slot] != DOWN:
        raise VarianceMismatch(f"slot {slot} is already upper")
    _check_metric(g_inv)
    return _move(t, slot, g_inv)


def lower_index(t: DenseTensor, slot: int, g: DenseTensor) -> DenseTensor:
    if t.variance[slot] != UP:
        raise VarianceMismatch(f"slot {slot} is already lower")
    _check_metric(g)
    return _move(t, slot, g)


def _move(t: DenseTensor, slot: int, m: DenseTensor) -> DenseTensor:
    sub = _LETTERS[: t.rank]
    new = "z"
    src = sub[:slot] + "y" + sub[slot + 1 :]
    out = sub[:slot] + new + sub[slot + 1 :]
    return jeinsum(f"{src},{new}y->{out}", t, m)


def inverse_metric(g: DenseTensor) -> DenseTensor:
    """Inverse of a jet-valued (0,2) tensor via a terminating Neumann series."""
    _check_metric(g)
    n = g.dim
    g0inv = np.linalg.inv(g.values)
    inv0 = DenseTensor.from_values(g0inv, (UP, UP))
    if g.order == 0:
        return inv0
    h = DenseTensor(g.data.copy(), (DOWN, DOWN), n, g.order)
    h.data[..., 0] = 0.0
    term = DenseTensor(np.zeros((n, n, ncoef(n, g.order))), (UP, UP), n, g.order)
    term.data[..., 0] = g0inv
    total = term
    for _ in range(g.order):
        term = -jeinsum("ab,bc,cd->ad", inv0, h, term)
        total = total + term
    return total


def levi_civita(g, dim: int | None = None) -> DenseTensor:
    """Covariant Levi-Civita tensor with orientation eps_{01..n-1} > 0."""
    gv = g.values if isinstance(g, DenseTensor) else np.asarray(g, dtype=float)
    n = dim or gv.shape[0]
    det = np.linalg.det(gv)
    if abs(det) < _SING_TOL:
        raise SingularMetric(f"|det g| = {abs(det):.3e}")
    eps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        eps[perm] = _perm_sign(perm)
    return DenseTensor.from_values(math.sqrt(abs(det)) * eps, (DOWN,) * n, n)


def _perm_sign(perm) -> int:
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def antisymmetrize_pair(x: DenseTensor, y: DenseTensor) -> DenseTensor:
    """Wedge ``x^i y^j - x^j y^i`` of two vectors."""
    if x.dim != y.dim:
        raise ShapeMismatch("vectors of different dimension")
    xy = jeinsum("i,j->ij", x, y)
    return xy - xy.permute("ij", "ji")


def commutator(a: DenseTensor, b: DenseTensor, g_inv: DenseTensor) -> DenseTensor:
    """``a_im b_j^m - a_jm b_i^m`` for two (0,2) tensors."""
    ab = jeinsum("im,mn,nj->ij", a, g_inv, b)
    return ab - ab.permute("ij", "ji")
