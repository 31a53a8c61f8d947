"""Ridge-regression design criteria on a design matrix (input type X).

All of them are built from ``A = X_train' X_train + lambda I``:

* parameter criteria work on ``C A^{-1} C'`` (AOPT, DOPT, EOPT);
* prediction-error criteria work on ``C T A^{-1} T' C'`` where ``T`` is the
  target design (the test rows, or for the ``0`` variants the training rows);
  the ``2`` variants use ``A^{-1} X'X A^{-1}`` in place of ``A^{-1}``;
* CD criteria divide the PEV diagonal by ``diag(C T T' C')``.

Every kind is evaluated on stacks of subsets at once.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateTarget, ValidationError
from ..linalg import (
    batched_gram,
    batched_inverse_spd,
    batched_logdet_from_cholesky,
    cholesky,
    shifted,
)
from .base import Criterion, _register_builtin

# kind -> (target, form, reducer); target None means the parameter covariance
KINDS = {
    "AOPT": (None, None, "trace"),
    "DOPT": (None, None, "logdet"),
    "EOPT": (None, None, "eigmax"),
    "PEVMEAN": ("test", "pev", "mean"),
    "PEVMEAN0": ("train", "pev", "mean"),
    "PEVMEAN2": ("test", "pev2", "mean"),
    "PEVMAX": ("test", "pev", "max"),
    "PEVMAX0": ("train", "pev", "max"),
    "PEVMAX2": ("test", "pev2", "max"),
    "CDMEAN": ("test", "cd", "mean"),
    "CDMEAN0": ("train", "cd", "mean"),
    "CDMEAN2": ("test", "cd2", "mean"),
    "CDMAX": ("test", "cd", "max"),
    "CDMAX0": ("train", "cd", "max"),
    "CDMAX2": ("test", "cd2", "max"),
    "GOPTPEV": ("test", "pev", "eigmax"),
    "GOPTPEV2": ("test", "pev", "eigmean"),
}

FORMULAS = {
    "AOPT": "trace[C(X'X+lambda I)^-1 C']",
    "DOPT": "logdet(C(X'X+lambda I)^-1 C')",
    "EOPT": "max eigenvalue(C(X'X+lambda I)^-1 C')",
    "PEVMEAN": "mean diag(C Xt (X'X+lambda I)^-1 Xt' C')",
    "PEVMEAN0": "mean diag(C X (X'X+lambda I)^-1 X' C')",
    "PEVMEAN2": "mean diag(C Xt (X'X+lambda I)^-1 X'X (X'X+lambda I)^-1 Xt' C')",
    "PEVMAX": "max diag(C Xt (X'X+lambda I)^-1 Xt' C')",
    "PEVMAX0": "max diag(C X (X'X+lambda I)^-1 X' C')",
    "PEVMAX2": "max diag(C Xt (X'X+lambda I)^-1 X'X (X'X+lambda I)^-1 Xt' C')",
    "CDMEAN": "mean[diag(C Xt (X'X+lambda I)^-1 Xt' C') / diag(C Xt Xt' C')]",
    "CDMEAN0": "mean[diag(C X (X'X+lambda I)^-1 X' C') / diag(C X X' C')]",
    "CDMEAN2": "mean[diag(C Xt (X'X+lambda I)^-1 X'X (X'X+lambda I)^-1 Xt' C') / diag(C Xt Xt' C')]",
    "CDMAX": "max[diag(C Xt (X'X+lambda I)^-1 Xt' C') / diag(C Xt Xt' C')]",
    "CDMAX0": "max[diag(C X (X'X+lambda I)^-1 X' C') / diag(C X X' C')]",
    "CDMAX2": "max[diag(C Xt (X'X+lambda I)^-1 X'X (X'X+lambda I)^-1 Xt' C') / diag(C Xt Xt' C')]",
    "GOPTPEV": "max eigenvalue(C Xt (X'X+lambda I)^-1 Xt' C')",
    "GOPTPEV2": "mean eigenvalue(C Xt (X'X+lambda I)^-1 Xt' C')",
}

CD_DENOMINATOR_FLOOR = 1e-14


def design_values(kind: str, X: np.ndarray, trains: np.ndarray, lam: float,
                  contrast: np.ndarray | None = None,
                  targets: np.ndarray | None = None) -> np.ndarray:
    """Evaluate design criterion ``kind`` for each row of ``trains``.

    ``targets`` is a ``(B, t)`` array of target rows, required for the kinds
    that look at X_Test.
    """
    target, form, reducer = KINDS[kind]
    Xtr = X[trains]
    G = batched_gram(Xtr)
    A = shifted(G, lam)
    L = cholesky(A)
    C = contrast

    if target is None:
        if C is None:
            if reducer == "logdet":
                return -batched_logdet_from_cholesky(L)
            if reducer == "trace":
                Linv = np.linalg.solve(L, np.broadcast_to(np.eye(A.shape[-1]), A.shape))
                return np.sum(Linv * Linv, axis=(-2, -1))
            return 1.0 / np.linalg.eigvalsh(A)[..., 0]
        V = C @ batched_inverse_spd(A) @ C.T
        V = 0.5 * (V + np.swapaxes(V, -1, -2))
        if reducer == "trace":
            return np.trace(V, axis1=-2, axis2=-1)
        if reducer == "logdet":
            return batched_logdet_from_cholesky(cholesky(V))
        return np.linalg.eigvalsh(V)[..., -1]

    T = Xtr if target == "train" else X[targets]
    if C is not None:
        T = np.matmul(C, T)
    Tt = np.swapaxes(T, -1, -2)
    if form in ("pev", "cd"):
        # T A^-1 T' = Z'Z with Z = L^-1 T'
        Z = np.linalg.solve(L, Tt)
    else:
        # T A^-1 X'X A^-1 T' = Z'Z with Z = X A^-1 T'
        Z = np.matmul(Xtr, np.linalg.solve(A, Tt))

    if reducer in ("eigmax", "eigmean"):
        M = np.matmul(np.swapaxes(Z, -1, -2), Z)
        w = np.linalg.eigvalsh(0.5 * (M + np.swapaxes(M, -1, -2)))
        return w[..., -1] if reducer == "eigmax" else np.mean(w, axis=-1)

    d = np.sum(Z * Z, axis=-2)
    if form in ("cd", "cd2"):
        den = np.sum(T * T, axis=-1)
        if np.any(den < CD_DENOMINATOR_FLOOR):
            raise DegenerateTarget("target row with zero variance in CD denominator")
        d = d / den
    return np.mean(d, axis=-1) if reducer == "mean" else np.max(d, axis=-1)


def _make(kind: str) -> Criterion:
    target = KINDS[kind][0]

    def batch(trains, ctx):
        targets = ctx.target_rows(trains) if target == "test" else None
        return design_values(kind, ctx.P.values, trains, ctx.spec.lambda_,
                             ctx.spec.contrast, targets)

    def check(ctx):
        C = ctx.spec.contrast
        if C is None:
            return
        if C.ndim != 2:
            raise ValidationError("contrast must be a matrix")
        p = ctx.P.shape[1]
        if target is None:
            want, what = p, "number of columns of P"
        elif target == "train":
            want, what = ctx.plan.ntoselect, "ntoselect"
        elif ctx.test_rows is not None:
            want, what = ctx.test_rows.size, "test set size"
        else:
            want, what = ctx.P.shape[0] - ctx.plan.ntoselect, "rows of P outside the training set"
        if C.shape[1] != want:
            raise ValidationError(f"{kind}: contrast has {C.shape[1]} columns, expected {want} ({what})")

    return Criterion(kind, batch=batch, input_type="X", formula=FORMULAS[kind], check=check)


for _kind in KINDS:
    _register_builtin(_make(_kind))
