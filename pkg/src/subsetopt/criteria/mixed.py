"""Mixed-model and kernel criteria (input type K).

With incidence matrices ``Z`` selecting individuals, fixed-effect design
``W`` and its residual projector ``M = I - W(W'W)^- W'``, the system matrix
of the random effects is ``S = Z_train' M Z_train + lambda Kinv``.  Because
``Z`` is an incidence matrix, ``Z' M Z`` just scatters ``M`` into the
(train, train) block of an N x N zero matrix and ``Z_test S^-1 Z_test'`` is
the (test, test) block of ``S^-1``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ..errors import MissingParameter, NotPositiveDefinite, ValidationError
from ..linalg import orthogonal_projection_complement, pairwise_distances
from .base import Criterion, _register_builtin


def _cho(S):
    try:
        return cho_factor(S, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None


def _system_inverse_block(Kinv, train, test, W, lam):
    N = Kinv.shape[0]
    M = orthogonal_projection_complement(W)
    S = lam * Kinv
    S[np.ix_(train, train)] += M
    E = np.zeros((N, len(test)))
    E[test, np.arange(len(test))] = 1.0
    return cho_solve(_cho(S), E, check_finite=False)[test]


def _quad_diag(C, Q):
    if C is None:
        return np.diagonal(Q).copy()
    return np.einsum("ij,jk,ik->i", C, Q, C)


def pev_mean_mm(Kinv, train, test, W=None, lam=1e-6, C=None) -> float:
    """mean diag(C Z_test (Z_train' M Z_train + lam Kinv)^-1 Z_test' C')."""
    Kinv = np.asarray(Kinv, dtype=np.float64)
    train, test = np.asarray(train), np.asarray(test)
    if W is None:
        W = np.ones((len(train), 1))
    Q = _system_inverse_block(Kinv.copy(), train, test, W, lam)
    return float(np.mean(_quad_diag(C, Q)))


def cd_mean_mm(K, Kinv, train, test, W=None, lam=1e-6, C=None) -> float:
    """Negated mean generalized CD: -mean[diag(C(K_tt - lam S^-1_tt)C') / diag(C K_tt C')]."""
    K = np.asarray(K, dtype=np.float64)
    Kinv = np.asarray(Kinv, dtype=np.float64)
    train, test = np.asarray(train), np.asarray(test)
    if W is None:
        W = np.ones((len(train), 1))
    Q = _system_inverse_block(Kinv.copy(), train, test, W, lam)
    Ktt = K[np.ix_(test, test)]
    num = _quad_diag(C, Ktt - lam * Q)
    den = _quad_diag(C, Ktt)
    return float(-np.mean(num / den))


def gauss_mean_mm(K, train, test, lam=1e-6) -> float:
    """-mean diag(K_tt - K_t,tr (K_tr,tr + lam I)^-1 K_tr,t)."""
    K = np.asarray(K, dtype=np.float64)
    train, test = np.asarray(train), np.asarray(test)
    Krr = K[np.ix_(train, train)] + lam * np.eye(len(train))
    Krt = K[np.ix_(train, test)]
    V = cho_solve(_cho(Krr), Krt, check_finite=False)
    post = np.diagonal(K)[test] - np.sum(Krt * V, axis=0)
    return float(-np.mean(post))


def gaussian_kernel(X) -> np.ndarray:
    """exp(-d_ij^2 / h) with h the mean squared distance over distinct pairs."""
    D2 = pairwise_distances(X) ** 2
    n = D2.shape[0]
    h = D2.sum() / (n * (n - 1))
    if h <= 0:
        return np.ones_like(D2)
    return np.exp(-D2 / h)


def _kinv_full(ctx):
    spec, P = ctx.spec, ctx.P
    if spec.kernel_inverse is not None:
        Ki = spec.kernel_inverse
        rows = Ki.row_index(P.row_ids)
        cols = rows
        if Ki.col_ids is not None:
            cols = np.asarray([Ki.col_ids.index(r) for r in P.row_ids])
        return np.array(Ki.values[np.ix_(rows, cols)])
    if P.shape[0] != P.shape[1]:
        raise MissingParameter("mixed-model criteria need P to be the inverse relationship "
                               "matrix (square) or an explicit kernel_inverse")
    return np.array(P.values)


def _fixed_design_full(ctx):
    W = ctx.spec.fixed_design
    N = ctx.P.shape[0]
    if W is None:
        return np.ones((N, 1))
    if hasattr(W, "row_index"):
        return np.array(W.values[W.row_index(ctx.P.row_ids)])
    W = np.asarray(W, dtype=np.float64)
    if W.ndim == 1:
        W = W[:, None]
    if W.shape[0] != N:
        raise ValidationError(f"fixed_design has {W.shape[0]} rows, P has {N}")
    return W


def _check_contrast(ctx):
    C = ctx.spec.contrast
    if C is None:
        return
    t = ctx.test_rows.size if ctx.test_rows is not None else ctx.P.shape[0] - ctx.plan.ntoselect
    if C.ndim != 2 or C.shape[1] != t:
        raise ValidationError(f"contrast must have {t} columns")


def _test_for(ctx, train):
    return ctx.target_rows(train[None, :])[0]


def _prep_pev(ctx):
    Kinv = _kinv_full(ctx)
    if not np.allclose(Kinv, Kinv.T, rtol=1e-10, atol=1e-12):
        raise ValidationError("kernel inverse is not symmetric")
    return {"Kinv": Kinv, "W": _fixed_design_full(ctx)}


def _prep_cd(ctx):
    out = _prep_pev(ctx)
    K = np.linalg.inv(out["Kinv"])
    out["K"] = 0.5 * (K + K.T)
    return out


def _pev_mm(train, ctx):
    c = ctx.cache
    return pev_mean_mm(c["Kinv"], train, _test_for(ctx, train), c["W"][train],
                       ctx.spec.lambda_, ctx.spec.contrast)


def _cd_mm(train, ctx):
    c = ctx.cache
    return cd_mean_mm(c["K"], c["Kinv"], train, _test_for(ctx, train), c["W"][train],
                      ctx.spec.lambda_, ctx.spec.contrast)


def _gauss_mm(train, ctx):
    return gauss_mean_mm(ctx.cache["K"], train, _test_for(ctx, train), ctx.spec.lambda_)


_register_builtin(Criterion(
    "PEVMEANMM", func=_pev_mm, input_type="K", prepare=_prep_pev, check=_check_contrast,
    formula="mean diag(C Zt (Z'MZ + lambda Kinv)^-1 Zt' C'), M = I - W(W'W)^- W'"))
_register_builtin(Criterion(
    "CDMEANMM", func=_cd_mm, input_type="K", prepare=_prep_cd, check=_check_contrast,
    formula="-mean[diag(C Zt (K - lambda (Z'MZ + lambda Kinv)^-1) Zt' C') / diag(C Zt K Zt' C')]"))
_register_builtin(Criterion(
    "GAUSSMEANMM", func=_gauss_mm, input_type="K",
    prepare=lambda ctx: {"K": gaussian_kernel(ctx.P.values)},
    formula="-mean diag(Kt,t - Kt,tr (Ktr,tr + lambda I)^-1 Ktr,t), K Gaussian kernel of P"))
