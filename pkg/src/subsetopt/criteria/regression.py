"""Regression criteria: AIC variable selection, fit/log-det trade-off, group DFBETAS."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DegenerateVariance, ValidationError
from ..linalg import pseudo_inverse, spectral_cutoff
from .base import Criterion, _register_builtin

FITLOGDET_SHIFT = 1e-7
SINGULAR_SENTINEL = 1e300
VARIANCE_FLOOR = 1e-14


def aic_ols(X, y) -> tuple[float, int]:
    """Gaussian AIC of y ~ 1 + X and the numerical rank of the design.

    Parameters counted: intercept, one per column of X, the error variance.
    A rank-deficient design is fitted with the pseudo-inverse.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, k = X.shape
    D = np.column_stack([np.ones(n), X])
    U, s, Vt = np.linalg.svd(D, full_matrices=False)
    rank = int(np.sum(s > spectral_cutoff(s, D.shape)))
    beta = pseudo_inverse(D) @ y
    rss = float(np.sum((y - D @ beta) ** 2))
    aic = n * (math.log(2 * math.pi) + math.log(rss / n) + 1.0) + 2.0 * (k + 2)
    return aic, rank


def fit_logdet(X, y, weight: float) -> float:
    """(1-w) * mean squared residual - w * log|X'X|.

    Coefficients come from a shrunken SVD inverse, d / (d^2 + 1e-7).  When
    ``X'X`` is singular and w > 0 the value is the sentinel 1e300.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    U, d, Vt = np.linalg.svd(X, full_matrices=False)
    coef = Vt.T @ ((d / (d * d + FITLOGDET_SHIFT)) * (U.T @ y))
    resid = y - X @ coef
    mse = float(np.mean(resid * resid))
    if weight == 0:
        return mse
    if d.size < X.shape[1] or d.min() <= spectral_cutoff(d, X.shape):
        return SINGULAR_SENTINEL
    logdet = float(2.0 * np.sum(np.log(d)))
    return (1.0 - weight) * mse - weight * logdet


def _ridge_coef(X, y, lam):
    XtX = X.T @ X
    A = XtX + lam * np.eye(X.shape[1])
    return np.linalg.solve(A, X.T @ y), A


def dfbetas_group(P, train, lam) -> float:
    """Negated group-deletion DFBETAS of a matrix laid out as P = [y, X].

    Intercept included.  Returns ``-(1/s) d' (X_t'X_t + lam I) d`` with
    ``d = beta_full - beta_train`` and ``s`` the residual standard deviation
    of the training fit.
    """
    P = np.asarray(P, dtype=np.float64)
    Xf = np.column_stack([np.ones(P.shape[0]), P[:, 1:]])
    b_full, _ = _ridge_coef(Xf, P[:, 0], lam)
    return _dfbetas(Xf, P[:, 0], b_full, np.asarray(train), lam)


def _dfbetas(Xf, y, b_full, train, lam):
    Xt, yt = Xf[train], y[train]
    b_t, A_t = _ridge_coef(Xt, yt, lam)
    resid = yt - Xt @ b_t
    sd = float(np.std(resid, ddof=1)) if resid.size > 1 else 0.0
    if sd < VARIANCE_FLOOR:
        raise DegenerateVariance("residual standard deviation of the subset fit is zero")
    d = b_full - b_t
    return -float(d @ A_t @ d) / sd


# -- criterion wiring --------------------------------------------------------

def _check_response(ctx):
    y = ctx.spec.response
    if y.ndim != 1 or y.size != ctx.P.shape[1]:
        raise ValidationError(f"response must be a vector of length {ctx.P.shape[1]} "
                              "(one value per column of P)")


def _aic(train, ctx):
    return aic_ols(ctx.P.values[train].T, ctx.spec.response)[0]


def _fitlogdet(train, ctx):
    return fit_logdet(ctx.P.values[train].T, ctx.spec.response, ctx.spec.weight)


def _prep_dfbetas(ctx):
    P = ctx.P.values
    Xf = np.column_stack([np.ones(P.shape[0]), P[:, 1:]])
    b_full, _ = _ridge_coef(Xf, P[:, 0], ctx.spec.lambda_)
    return {"Xf": Xf, "y": np.array(P[:, 0]), "b_full": b_full}


def _dfbetas_crit(train, ctx):
    c = ctx.cache
    return _dfbetas(c["Xf"], c["y"], c["b_full"], train, ctx.spec.lambda_)


def _check_dfbetas(ctx):
    if ctx.P.shape[1] < 2:
        raise ValidationError("DFBETAS needs a response column followed by predictors")


_register_builtin(Criterion(
    "AICOLS", func=_aic, requires=("response",), input_type="features", selects="columns",
    check=_check_response,
    formula="n[log 2pi + log(RSS/n) + 1] + 2(k+2), OLS of y on [1, selected]"))
_register_builtin(Criterion(
    "FITLOGDET", func=_fitlogdet, requires=("response", "weight"), input_type="features",
    selects="columns", check=_check_response,
    formula="(1-w) mean(resid^2) - w logdet(X'X)"))
_register_builtin(Criterion(
    "DFBETAS", func=_dfbetas_crit, input_type="response+X", prepare=_prep_dfbetas,
    check=_check_dfbetas, min_select=2,
    formula="-(1/sd_t) (b - b_t)'(X_t'X_t + lambda I)(b - b_t)"))
