"""Relationship-matrix criteria: kernel alignment and gain versus relatedness."""

from __future__ import annotations

import numpy as np

from ..data import LabeledMatrix
from ..errors import MonomorphicData, ValidationError
from .base import Criterion, _register_builtin

HETEROZYGOSITY_FLOOR = 1e-14


def vanraden_amat(M):
    """Genomic relationship matrix ``Wc Wc' / k`` from 0/1/2 allele counts.

    ``Wc`` is the column-centred marker matrix and ``k = 2 sum p_j (1 - p_j)``
    with ``p_j`` the allele frequency of marker j.  A LabeledMatrix input gives
    a LabeledMatrix output with the row ids on both axes.
    """
    labeled = isinstance(M, LabeledMatrix)
    values = M.values if labeled else np.asarray(M, dtype=np.float64)
    p = values.mean(axis=0) / 2.0
    k = 2.0 * np.sum(p * (1.0 - p))
    if k <= HETEROZYGOSITY_FLOOR:
        raise MonomorphicData("no polymorphic markers")
    Wc = values - values.mean(axis=0)
    A = (Wc @ Wc.T) / k
    A = 0.5 * (A + A.T)
    if labeled:
        return LabeledMatrix(M.row_ids, A, M.row_ids)
    return A


def scaled_crossprod_kernel(M) -> np.ndarray:
    """``Z Z' / m`` with ``Z`` the centred, unit-variance columns of M."""
    M = np.asarray(M, dtype=np.float64)
    sd = M.std(axis=0, ddof=1)
    if np.any(sd <= 0):
        raise MonomorphicData("feature with zero variance")
    Z = (M - M.mean(axis=0)) / sd
    return (Z @ Z.T) / M.shape[1]


def lower_tri(A) -> np.ndarray:
    """Entries on and below the diagonal, column-major like R's lower.tri."""
    i, j = np.tril_indices(A.shape[0])
    order = np.lexsort((i, j))
    return A[i[order], j[order]]


def _is_allele_counts(values) -> bool:
    return bool(np.all(np.isin(values, (0.0, 1.0, 2.0))))


def _kernel_for(features, allele_counts):
    # features: rows are features, columns individuals
    M = features.T
    return vanraden_amat(M) if allele_counts else scaled_crossprod_kernel(M)


def _prep_align(ctx):
    values = ctx.P.values
    counts = _is_allele_counts(values)
    if ctx.spec.target_kernel is not None:
        target = ctx.spec.target_kernel
        if target.shape != (values.shape[1], values.shape[1]):
            raise ValidationError(f"target_kernel must be {values.shape[1]}x{values.shape[1]}")
    else:
        target = _kernel_for(values, counts)
    return {"target_lower": lower_tri(target), "allele_counts": counts}


def _align(train, ctx):
    A = _kernel_for(ctx.P.values[train], ctx.cache["allele_counts"])
    diff = ctx.cache["target_lower"] - lower_tri(A)
    return float(np.mean(diff * diff))


def _gain_inbreeding(train, ctx):
    w = ctx.spec.weight
    rows = ctx.P.values[train]
    value = -(1.0 - w) * float(np.mean(rows[:, 0]))
    if w > 0:
        A = vanraden_amat(rows[:, 1:] + 1.0)
        value += w * float(np.mean(lower_tri(A)))
    return value


def _check_gain(ctx):
    if ctx.P.shape[1] < 2:
        raise ValidationError("GAININB needs a value column followed by marker columns")


_register_builtin(Criterion(
    "KERNELALIGN", func=_align, input_type="features", selects="columns",
    prepare=_prep_align,
    formula="mean squared difference of lower triangles: kernel(selected features) vs target_kernel"))
_register_builtin(Criterion(
    "GAININB", func=_gain_inbreeding, requires=("weight",), input_type="gain+markers",
    check=_check_gain,
    formula="-(1-w) mean(g) + w mean(lower triangle of A(markers + 1))"))
