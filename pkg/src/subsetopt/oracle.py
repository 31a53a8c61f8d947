"""Exhaustive enumeration and random-subset baselines."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .criteria.base import CriterionSpec, build_context
from .data import LabeledMatrix, PartitionPlan
from .engine import _eval_chunk, random_solution
from .errors import ConfigError, TooLarge

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class EnumerationResult:
    min_value: float
    argmin_solutions: list
    subsets_evaluated: int

    def to_dict(self) -> dict:
        return {"min_value": self.min_value,
                "argmin_solutions": [list(s) for s in self.argmin_solutions],
                "subsets_evaluated": self.subsets_evaluated}


def _combination_chunks(m: int, n: int, size: int):
    it = itertools.combinations(range(m), n)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield np.array(block, dtype=np.intp)


def enumerate_best(P: LabeledMatrix, plan: PartitionPlan, spec: CriterionSpec,
                   tie_tolerance: float = 1e-9, cap: int = DEFAULT_CAP, workers: int = 1,
                   chunk_size: int = 65536) -> EnumerationResult:
    """Evaluate every ntoselect-subset of the candidates in lexicographic order.

    Returns the minimum and every subset within ``tie_tolerance`` of it, in
    lexicographic order.  Raises TooLarge when the subset count exceeds ``cap``.
    """
    m, n = len(plan.candidates), plan.ntoselect
    total = math.comb(m, n)
    if total > cap:
        raise TooLarge(f"C({m}, {n}) = {total} subsets exceeds the enumeration cap {cap}")
    ctx = build_context(P, plan, spec)

    # per chunk keep (min, candidates within tolerance of the chunk min)
    def work(idx):
        vals = _eval_chunk(ctx, ctx.candidate_rows[idx])
        lo = float(vals.min())
        keep = np.nonzero(vals <= lo + tie_tolerance)[0]
        return lo, idx[keep], vals[keep]

    parts = []
    chunks = _combination_chunks(m, n, chunk_size)
    if workers <= 1:
        parts = [work(c) for c in chunks]
    else:
        # bounded waves keep memory flat; results are merged in chunk order
        with ThreadPoolExecutor(max_workers=workers) as ex:
            while True:
                wave = list(itertools.islice(chunks, 2 * workers))
                if not wave:
                    break
                parts.extend(ex.map(work, wave))

    best = min(p[0] for p in parts)
    ties = []
    for _, idx, vals in parts:
        for row, v in zip(idx, vals):
            if v <= best + tie_tolerance:
                ties.append(tuple(plan.candidates[i] for i in row))
    return EnumerationResult(best, ties, total)


@dataclass(frozen=True)
class Baseline:
    mean: float
    sd: float
    min: float
    values: list


def random_baseline(P: LabeledMatrix, plan: PartitionPlan, spec: CriterionSpec, reps: int,
                    rng=None) -> Baseline:
    """Criterion values of ``reps`` uniform random subsets; sd uses ddof=1."""
    if reps < 1:
        raise ConfigError("reps must be positive")
    rng = np.random.default_rng(rng)
    ctx = build_context(P, plan, spec)
    m, n = len(plan.candidates), plan.ntoselect
    sols = np.array([random_solution(m, n, rng) for _ in range(reps)], dtype=np.intp)
    vals = _eval_chunk(ctx, ctx.candidate_rows[sols])
    sd = float(np.std(vals, ddof=1)) if reps > 1 else 0.0
    return Baseline(float(vals.mean()), sd, float(vals.min()), vals.tolist())
