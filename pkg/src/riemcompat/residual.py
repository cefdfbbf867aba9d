"""Residual records returned by every identity check."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import DenseTensor

OK = "ok"
NOT_APPLICABLE = "not_applicable"


def _vals(x) -> np.ndarray:
    if isinstance(x, DenseTensor):
        return x.values
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class Residual:
    """Left-minus-right of one identity at one point.

    ``scaled_max = max|value| / scale`` with ``scale = max(1, largest term)``.
    """

    name: str
    anchor: str
    value: np.ndarray
    scale: float
    status: str = OK
    detail: dict = field(default_factory=dict)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.value))) if np.size(self.value) else 0.0

    @property
    def scaled_max(self) -> float:
        return self.max_abs / self.scale

    @property
    def applicable(self) -> bool:
        return self.status == OK

    def ok(self, tol: float) -> bool:
        return self.scaled_max <= tol

    def __repr__(self) -> str:
        return f"Residual({self.name!r}, scaled_max={self.scaled_max:.3e}, status={self.status!r})"


def make_residual(name: str, anchor: str, diff, *terms, detail=None) -> Residual:
    value = _vals(diff)
    scale = 1.0
    for t in terms:
        v = _vals(t)
        if v.size:
            scale = max(scale, float(np.max(np.abs(v))))
    return Residual(name, anchor, np.array(value, dtype=float), scale, OK, dict(detail or {}))


def not_applicable(name: str, anchor: str, reason: str) -> Residual:
    return Residual(name, anchor, np.zeros(0), 1.0, NOT_APPLICABLE, {"reason": reason})
