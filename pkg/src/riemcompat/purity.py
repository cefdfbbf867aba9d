"""Eigenframes of a symmetric tensor, triple vanishing, purity and Pontryagin forms.

All functions here work on point values (plain arrays or order-0 tensors).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np
import scipy.linalg

from .errors import DegenerateFrame, NotRiemannian, ShapeMismatch
from .residual import Residual, make_residual, not_applicable


def _arr(x) -> np.ndarray:
    return np.asarray(getattr(x, "values", x), dtype=float)


@dataclass(frozen=True)
class EigenFrame:
    eigenvalues: np.ndarray
    vectors: np.ndarray  # vectors[a] = X(a)^i
    min_gap: float
    degenerate: bool
    g: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def gap_tol(self) -> float:
        return default_gap_tol(self.eigenvalues)

    def eigen_residual(self, b) -> Residual:
        """``b_ij X(a)^j - lambda_a g_ij X(a)^j`` for every frame vector."""
        b = _arr(b)
        bx = self.vectors @ b
        lx = self.eigenvalues[:, None] * (self.vectors @ self.g)
        return make_residual("eigenframe", "Thm1", bx - lx, bx, lx)

    def orthonormality_residual(self) -> Residual:
        gram = self.vectors @ self.g @ self.vectors.T
        return make_residual("frame_orthonormality", "Thm1", gram - np.eye(self.dim), gram)


def default_gap_tol(eigenvalues) -> float:
    return 1e-6 * (float(np.max(np.abs(eigenvalues))) + 1.0)


def eigenframe(b, g) -> EigenFrame:
    """g-orthonormal eigenvectors of ``b_i^j``, ascending, first nonzero component positive."""
    b, g = _arr(b), _arr(g)
    if b.shape != g.shape or b.ndim != 2:
        raise ShapeMismatch("b and g must be square matrices of equal size")
    b = 0.5 * (b + b.T)
    g = 0.5 * (g + g.T)
    if np.linalg.eigvalsh(g).min() <= 0:
        raise NotRiemannian("eigenframe needs a positive-definite metric")
    w, v = scipy.linalg.eigh(b, g)
    vecs = v.T.copy()
    for a in range(len(w)):
        x = vecs[a]
        nz = np.flatnonzero(np.abs(x) > 1e-12 * np.abs(x).max())
        if x[nz[0]] < 0:
            vecs[a] = -x
    gaps = np.diff(w)
    min_gap = float(gaps.min()) if gaps.size else float("inf")
    return EigenFrame(w, vecs, min_gap, min_gap <= default_gap_tol(w), g)


def ds_check(riem_lower, frame: EigenFrame, gap_tol: float | None = None) -> Residual:
    """``max |R_ijkl X(a)^i X(b)^j X(c)^k|`` over triples with ``lambda_c`` split from ``lambda_a, lambda_b``."""
    R = _arr(riem_lower)
    lam, X = frame.eigenvalues, frame.vectors
    tol = frame.gap_tol if gap_tol is None else gap_tol
    n = frame.dim
    admissible, skipped = [], 0
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if abs(lam[a] - lam[c]) > tol and abs(lam[b] - lam[c]) > tol:
                    admissible.append((a, b, c))
                else:
                    skipped += 1
    if not admissible:
        return not_applicable("ds_triples", "Thm1", f"no admissible triple ({skipped} skipped)")
    # T[a,b,c,l] = R_ijkl X(a)^i X(b)^j X(c)^k
    T = np.einsum("ijkl,ai,bj,ck->abcl", R, X, X, X)
    vals = np.stack([T[a, b, c] for a, b, c in admissible])
    scale = float(np.abs(R).max()) * max(1.0, float(np.abs(X).max())) ** 3
    return Residual("ds_triples", "Thm1", vals, max(1.0, scale),
                    detail={"admissible": len(admissible), "skipped": skipped})


@dataclass(frozen=True)
class PurityCertificate:
    lambda_ab: np.ndarray
    off_plane_max: float
    scale: float

    def pure(self, tol: float = 1e-8) -> bool:
        return self.off_plane_max <= tol * self.scale

    def as_residual(self) -> Residual:
        return Residual("purity", "Thm6", np.array([self.off_plane_max]), self.scale)


def _wedge(x, y):
    return np.outer(x, y) - np.outer(y, x)


def purity_certificate(riem_lower, frame: EigenFrame, allow_degenerate: bool = False) -> PurityCertificate:
    """Project ``V(a,b)^kl = R_ij^kl X(a)^i ^ X(b)^j`` onto the plane ``X(a) ^ X(b)``.

    ``allow_degenerate`` accepts frames with coincident eigenvalues; the
    frame is still orthonormal, only its uniqueness is lost.
    """
    if frame.degenerate and not allow_degenerate:
        raise DegenerateFrame(f"eigenvalue gap {frame.min_gap:.3e} below {frame.gap_tol:.3e}")
    R = _arr(riem_lower)
    g = frame.g
    gi = np.linalg.inv(g)
    Rm = np.einsum("ijpq,pk,ql->ijkl", R, gi, gi)
    n = frame.dim
    lam = np.zeros((n, n))
    worst = 0.0
    for a, b in combinations(range(n), 2):
        W = _wedge(frame.vectors[a], frame.vectors[b])
        V = np.einsum("ijkl,ij->kl", Rm, W)
        ww = np.einsum("kl,pq,kp,lq->", W, W, g, g)
        lam[a, b] = lam[b, a] = np.einsum("kl,pq,kp,lq->", V, W, g, g) / ww
        worst = max(worst, float(np.abs(V - lam[a, b] * W).max()))
    scale = max(1.0, float(np.abs(Rm).max()))
    return PurityCertificate(lam, worst, scale)


def omega4(riem_mixed, x1, x2, x3, x4) -> float:
    """``R_ija^b R_klb^a (x1 ^ x2)^ij (x3 ^ x4)^kl``."""
    R = _arr(riem_mixed)
    F = np.einsum("ijab,ij->ab", R, _wedge(x1, x2))
    G = np.einsum("klba,kl->ba", R, _wedge(x3, x4))
    return float(np.einsum("ab,ba->", F, G))


def _perm_sign(p) -> int:
    sign, seen = 1, list(p)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


_PERMS4 = [(p, _perm_sign(p)) for p in permutations(range(4))]


def pontryagin4(riem_mixed, vectors) -> float:
    """Total antisymmetrization of :func:`omega4` over the four vectors."""
    vs = [np.asarray(v, dtype=float) for v in vectors]
    if len(vs) != 4:
        raise ShapeMismatch("pontryagin4 takes exactly four vectors")
    total = 0.0
    for p, s in _PERMS4:
        total += s * omega4(riem_mixed, *(vs[i] for i in p))
    return total


def pontryagin_frame_residual(riem_mixed, frame: EigenFrame) -> Residual:
    """``Omega_4`` on every 4-subset of the frame."""
    n = frame.dim
    if n < 4:
        return not_applicable("pontryagin4", "Maillot", f"needs n >= 4, got {n}")
    R = _arr(riem_mixed)
    X = frame.vectors
    vals, terms = [], [1.0]
    for quad in combinations(range(n), 4):
        vals.append(pontryagin4(R, [X[i] for i in quad]))
        terms.extend(abs(omega4(R, *(X[quad[i]] for i in p))) for p, _ in _PERMS4)
    return Residual("pontryagin4", "Maillot", np.array(vals), max(terms))
