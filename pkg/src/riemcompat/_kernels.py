"""Hot jet-arithmetic kernels.

Two interchangeable backends compute the same truncated products: numba
``@njit`` loops over the sparse multiplication table, and a pure-numpy path
that gathers coefficient pairs and scatters them with a dense 0/1 matrix.
Set ``RIEMCOMPAT_DISABLE_NUMBA=1`` to force the numpy path.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLED = os.environ.get("RIEMCOMPAT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")
NUMBA_ENABLED = numba is not None and not _DISABLED


# -- numpy path -------------------------------------------------------------

def _mul_numpy(a, b, lhs, rhs, scatter):
    return (a[:, lhs] * b[:, rhs]) @ scatter


def _compose_numpy(h, series, lhs, rhs, scatter):
    out = np.zeros_like(h)
    out[:, 0] = series[-1]
    for c in series[-2::-1]:
        out = (out[:, lhs] * h[:, rhs]) @ scatter
        out[:, 0] += c
    return out


# -- numba path -------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _mul_numba(a, b, lhs, rhs, dest, ncoef):
        m = a.shape[0]
        out = np.zeros((m, ncoef))
        for r in range(m):
            for t in range(lhs.shape[0]):
                out[r, dest[t]] += a[r, lhs[t]] * b[r, rhs[t]]
        return out

    @numba.njit(cache=True, nogil=True)
    def _compose_numba(h, series, lhs, rhs, dest, ncoef):
        m = h.shape[0]
        out = np.zeros((m, ncoef))
        tmp = np.zeros(ncoef)
        for r in range(m):
            acc = np.zeros(ncoef)
            acc[0] = series[series.shape[0] - 1]
            for s in range(series.shape[0] - 2, -1, -1):
                tmp[:] = 0.0
                for t in range(lhs.shape[0]):
                    tmp[dest[t]] += acc[lhs[t]] * h[r, rhs[t]]
                acc[:] = tmp
                acc[0] += series[s]
            out[r, :] = acc
        return out


def mul(a: np.ndarray, b: np.ndarray, basis, backend: str | None = None) -> np.ndarray:
    """Truncated product of two batches of Taylor coefficient rows, shape (m, K)."""
    backend = backend or ("numba" if NUMBA_ENABLED else "numpy")
    if backend == "numba":
        return _mul_numba(a, b, basis.lhs, basis.rhs, basis.dest, basis.size)
    return _mul_numpy(a, b, basis.lhs, basis.rhs, basis.scatter)


def compose(h: np.ndarray, series: np.ndarray, basis, backend: str | None = None) -> np.ndarray:
    """Evaluate ``sum_k series[k] * h**k`` for rows ``h`` with zero constant term."""
    backend = backend or ("numba" if NUMBA_ENABLED else "numpy")
    if backend == "numba":
        return _compose_numba(h, series, basis.lhs, basis.rhs, basis.dest, basis.size)
    return _compose_numpy(h, series, basis.lhs, basis.rhs, basis.scatter)
