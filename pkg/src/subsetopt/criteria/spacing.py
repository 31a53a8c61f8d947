"""Maximin-distance design: spread the selected points as far apart as possible."""

from __future__ import annotations

import numpy as np

from ..linalg import pairwise_distances
from .base import Criterion, _register_builtin


def maximin_values(D: np.ndarray, trains: np.ndarray) -> np.ndarray:
    """Negated smallest pairwise distance within each subset."""
    trains = np.atleast_2d(trains)
    sub = D[trains[:, :, None], trains[:, None, :]]
    n = trains.shape[1]
    sub[:, np.arange(n), np.arange(n)] = np.inf
    return -sub.min(axis=(1, 2))


_register_builtin(Criterion(
    "MAXIMIN",
    batch=lambda trains, ctx: maximin_values(ctx.cache["D"], trains),
    input_type="X", min_select=2,
    prepare=lambda ctx: {"D": pairwise_distances(ctx.P.values)},
    formula="-min_{i != j in train} d_ij"))
