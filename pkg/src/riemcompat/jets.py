"""Truncated multivariate Taylor jets.

A jet of order ``N`` in ``n`` variables stores the Taylor coefficients
``c_alpha = d^alpha f / alpha!`` for every multi-index with ``|alpha| <= N``.
Coefficients are laid out graded by total degree, so truncating to a lower
order is a prefix slice and the same layout is reused by tensor-valued jets
(trailing coefficient axis in :class:`riemcompat.tensor.DenseTensor`).
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import JetBudgetExceeded

MAX_ORDER = 4


def _multi_indices(n: int, order: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []
    for deg in range(order + 1):
        level = [a for a in itertools.product(range(deg, -1, -1), repeat=n) if sum(a) == deg]
        out.extend(level)
    return out


class JetBasis:
    """Multi-index table and multiplication/derivative maps for one (n, order)."""

    def __init__(self, n: int, order: int):
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
        self.n = n
        self.order = order
        table = _multi_indices(n, order)
        self.alphas = np.array(table, dtype=np.int64).reshape(len(table), n)
        self.size = len(self.alphas)
        self.index = {tuple(int(v) for v in a): i for i, a in enumerate(self.alphas)}
        self.factorials = np.array(
            [math.prod(math.factorial(int(v)) for v in a) for a in self.alphas], dtype=float
        )
        self.degrees = self.alphas.sum(axis=1)

        lhs, rhs, dest = [], [], []
        for i, a in enumerate(self.alphas):
            for j, b in enumerate(self.alphas):
                s = a + b
                if s.sum() <= order:
                    lhs.append(i)
                    rhs.append(j)
                    dest.append(self.index[tuple(int(v) for v in s)])
        self.lhs = np.array(lhs, dtype=np.int64)
        self.rhs = np.array(rhs, dtype=np.int64)
        self.dest = np.array(dest, dtype=np.int64)
        self.scatter = np.zeros((len(dest), self.size))
        self.scatter[np.arange(len(dest)), self.dest] = 1.0

        # d/dx_j maps this order onto order - 1
        if order > 0:
            low = _multi_indices(n, order - 1)
            self.deriv_src = np.zeros((n, len(low)), dtype=np.int64)
            self.deriv_fac = np.zeros((n, len(low)))
            for j in range(n):
                for i, b in enumerate(low):
                    up = list(b)
                    up[j] += 1
                    self.deriv_src[j, i] = self.index[tuple(up)]
                    self.deriv_fac[j, i] = b[j] + 1

    def __repr__(self) -> str:
        return f"JetBasis(n={self.n}, order={self.order}, size={self.size})"


@lru_cache(maxsize=None)
def basis(n: int, order: int) -> JetBasis:
    return JetBasis(n, order)


def ncoef(n: int, order: int) -> int:
    return math.comb(n + order, order)


# -- univariate Taylor series used by compose --------------------------------

def _series_power(x0: float, r: float, order: int) -> np.ndarray:
    out = np.empty(order + 1)
    c = 1.0
    for k in range(order + 1):
        out[k] = c * x0 ** (r - k)
        c *= (r - k) / (k + 1)
    return out


def _series(fname: str, x0: float, order: int) -> np.ndarray:
    ks = np.arange(order + 1)
    fact = np.array([math.factorial(int(k)) for k in ks], dtype=float)
    if fname == "exp":
        return math.exp(x0) / fact
    if fname == "log":
        out = np.empty(order + 1)
        out[0] = math.log(x0)
        for k in range(1, order + 1):
            out[k] = (-1) ** (k + 1) / (k * x0**k)
        return out
    if fname == "sin":
        return np.array([math.sin(x0 + k * math.pi / 2) for k in ks]) / fact
    if fname == "cos":
        return np.array([math.cos(x0 + k * math.pi / 2) for k in ks]) / fact
    if fname == "sinh":
        return np.array([math.sinh(x0) if k % 2 == 0 else math.cosh(x0) for k in ks]) / fact
    if fname == "cosh":
        return np.array([math.cosh(x0) if k % 2 == 0 else math.sinh(x0) for k in ks]) / fact
    if fname == "sqrt":
        return _series_power(x0, 0.5, order)
    if fname == "recip":
        return _series_power(x0, -1.0, order)
    raise KeyError(fname)


def compose_rows(rows: np.ndarray, fname: str, b: JetBasis) -> np.ndarray:
    """Apply a univariate function to each row of Taylor coefficients."""
    out = np.empty_like(rows)
    h = rows.copy()
    h[:, 0] = 0.0
    for r in range(rows.shape[0]):
        series = _series(fname, float(rows[r, 0]), b.order)
        out[r] = _kernels.compose(h[r : r + 1], series, b)[0]
    return out


class Jet:
    """Scalar jet: value and all partial derivatives up to ``order`` at a point."""

    __slots__ = ("basis", "coeffs", "point")

    def __init__(self, b: JetBasis, coeffs: np.ndarray, point=None):
        self.basis = b
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.point = point

    # construction
    @classmethod
    def constant(cls, value: float, n: int, order: int, point=None) -> "Jet":
        b = basis(n, order)
        c = np.zeros(b.size)
        c[0] = value
        return cls(b, c, point)

    @classmethod
    def variable(cls, i: int, value: float, n: int, order: int, point=None) -> "Jet":
        b = basis(n, order)
        c = np.zeros(b.size)
        c[0] = value
        if order >= 1:
            e = [0] * n
            e[i] = 1
            c[b.index[tuple(e)]] = 1.0
        return cls(b, c, point)

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def order(self) -> int:
        return self.basis.order

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def partial(self, alpha) -> float:
        """Partial derivative d^alpha at the base point."""
        i = self.basis.index[tuple(alpha)]
        return float(self.coeffs[i] * self.basis.factorials[i])

    def derivatives(self) -> dict[tuple[int, ...], float]:
        return {
            tuple(int(v) for v in a): float(c * f)
            for a, c, f in zip(self.basis.alphas, self.coeffs, self.basis.factorials)
        }

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetBudgetExceeded(f"cannot raise jet order {self.order} to {order}")
        b = basis(self.n, order)
        return Jet(b, self.coeffs[: b.size].copy(), self.point)

    def diff(self, j: int) -> "Jet":
        if self.order == 0:
            raise JetBudgetExceeded("derivative of an order-0 jet")
        b = self.basis
        return Jet(basis(self.n, self.order - 1), self.coeffs[b.deriv_src[j]] * b.deriv_fac[j], self.point)

    # arithmetic
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.basis is not self.basis:
                raise ValueError("jets of different dimension or order")
            return other
        return Jet.constant(float(other), self.n, self.order, self.point)

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.basis, self.coeffs + self._coerce(other).coeffs, self.point)
        c = self.coeffs.copy()
        c[0] += other
        return Jet(self.basis, c, self.point)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.basis, -self.coeffs, self.point)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            o = self._coerce(other)
            c = _kernels.mul(self.coeffs[None, :], o.coeffs[None, :], self.basis)[0]
            return Jet(self.basis, c, self.point)
        return Jet(self.basis, self.coeffs * other, self.point)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        if self.coeffs[0] == 0.0:
            raise ZeroDivisionError("reciprocal of a jet with zero value")
        return self.apply("recip")

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * self._coerce(other).reciprocal()
        if other == 0:
            raise ZeroDivisionError("division by zero")
        return Jet(self.basis, self.coeffs / other, self.point)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def ipow(self, k: int) -> "Jet":
        """Integer power by repeated squaring."""
        if k < 0:
            return self.ipow(-k).reciprocal()
        result = Jet.constant(1.0, self.n, self.order, self.point)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def apply(self, fname: str) -> "Jet":
        c = compose_rows(self.coeffs[None, :], fname, self.basis)[0]
        return Jet(self.basis, c, self.point)

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, value={self.value!r})"
