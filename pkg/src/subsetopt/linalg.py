"""Dense linear-algebra primitives shared by the design criteria.

Everything here is a pure function of its arguments.  Positive-definite
systems go through a Cholesky factor; eigen decompositions are used only
where a criterion needs eigenvalues.  Functions whose name starts with
``batched_`` accept stacks of matrices with shape ``(B, k, k)`` and loop over
the leading axis inside LAPACK, so a result never depends on how a
population was split into batches.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import ConvergenceFailure, NotPositiveDefinite

EPS = np.finfo(np.float64).eps


def _as_square(S) -> np.ndarray:
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    return S


def shifted(S: np.ndarray, lam: float) -> np.ndarray:
    """Return ``S + lam * I`` for a single matrix or a stack."""
    S = np.asarray(S, dtype=np.float64)
    if lam == 0:
        return S.copy()
    k = S.shape[-1]
    return S + lam * np.eye(k)


def cholesky(S: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; works on stacks.  Raises NotPositiveDefinite."""
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None


def ridge_inverse(S, lam: float) -> np.ndarray:
    """``(S + lam I)^{-1}`` through a Cholesky factorisation."""
    S = _as_square(S)
    L = cholesky(shifted(S, lam))
    Linv = np.linalg.solve(L, np.eye(S.shape[0]))
    out = Linv.T @ Linv
    return 0.5 * (out + out.T)


def log_det_psd(S, lam: float = 0.0) -> float:
    """Natural log of ``det(S + lam I)`` as twice the summed log pivots."""
    S = _as_square(S)
    L = cholesky(shifted(S, lam))
    return float(2.0 * np.sum(np.log(np.diagonal(L))))


def eigen_extremes(S) -> tuple[float, float]:
    """Largest eigenvalue and the arithmetic mean of all eigenvalues."""
    S = _as_square(S)
    if not np.all(np.isfinite(S)):
        raise ConvergenceFailure("matrix has non-finite entries")
    try:
        w = np.linalg.eigvalsh(S)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from None
    return float(w[-1]), float(np.mean(w))


def spectral_cutoff(singular_values: np.ndarray, shape: tuple[int, ...]) -> float:
    """Threshold under which singular values count as zero."""
    if singular_values.size == 0:
        return 0.0
    return max(shape) * EPS * float(np.max(singular_values))


def column_space_basis(W) -> np.ndarray:
    """Orthonormal basis of range(W), rank decided by :func:`spectral_cutoff`."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim == 1:
        W = W[:, None]
    U, s, _ = np.linalg.svd(W, full_matrices=False)
    rank = int(np.sum(s > spectral_cutoff(s, W.shape)))
    return U[:, :rank]


def orthogonal_projection_complement(W) -> np.ndarray:
    """``M = I - W (W'W)^- W'``, the projector onto the complement of range(W)."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim == 1:
        W = W[:, None]
    U = column_space_basis(W)
    M = np.eye(W.shape[0]) - U @ U.T
    return 0.5 * (M + M.T)


def pseudo_inverse(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    keep = s > spectral_cutoff(s, A.shape)
    return (Vt[keep].T / s[keep]) @ U[:, keep].T


def pairwise_distances(X) -> np.ndarray:
    """Euclidean distance matrix between the rows of ``X``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("pairwise_distances needs a 2-D array with at least two rows")
    return squareform(pdist(X, metric="euclidean"))


# -- stacked helpers ---------------------------------------------------------

def batched_gram(Xs: np.ndarray) -> np.ndarray:
    """``X_b' X_b`` for every matrix in a ``(B, n, p)`` stack."""
    return np.matmul(np.swapaxes(Xs, -1, -2), Xs)


def batched_logdet_from_cholesky(L: np.ndarray) -> np.ndarray:
    return 2.0 * np.sum(np.log(np.diagonal(L, axis1=-2, axis2=-1)), axis=-1)


def batched_inverse_spd(A: np.ndarray) -> np.ndarray:
    """Inverse of every SPD matrix in a stack, via its Cholesky factor."""
    L = cholesky(A)
    eye = np.broadcast_to(np.eye(A.shape[-1]), A.shape)
    Linv = np.linalg.solve(L, eye)
    return np.matmul(np.swapaxes(Linv, -1, -2), Linv)
