"""Paired-seed comparison of the plain GA against the look-ahead/tabu variant."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .criteria.base import CriterionSpec, build_context
from .data import LabeledMatrix, PartitionPlan, RunConfig
from .engine import run_lagat

VARIANTS = ("GA", "LA-GA-T")


def variant_config(base: RunConfig, variant: str) -> RunConfig:
    if variant == "GA":
        return base.replace(tabu=False, niterreg=0)
    return base.replace(tabu=True, niterreg=base.niterreg)


def padded(trace, length: int) -> list:
    """Trace extended to ``length`` by repeating its final value."""
    trace = list(trace)[:length]
    return trace + [trace[-1]] * (length - len(trace))


def iterations_to_threshold(trace, threshold: float) -> Optional[int]:
    """First iteration whose value is <= threshold, or None if never reached."""
    if math.isinf(threshold) and threshold > 0:
        return 0
    for i, v in enumerate(trace):
        if v <= threshold:
            return i
    return None


@dataclass
class BenchResult:
    niterations: int
    seeds: list
    traces: dict = field(default_factory=dict)   # variant -> list of traces (per seed)
    hits: dict = field(default_factory=dict)     # variant -> list of iteration counts or None
    thresholds: list = field(default_factory=list)
    elapsed: dict = field(default_factory=dict)

    def median_iterations(self, variant: str) -> float:
        # a run that never reaches the threshold counts as niterations
        vals = [self.niterations if h is None else h for h in self.hits[variant]]
        return float(np.median(vals))

    def to_dict(self) -> dict:
        return {
            "niterations": self.niterations,
            "seeds": self.seeds,
            "thresholds": self.thresholds,
            "variants": {
                v: {"traces": self.traces[v], "iterations_to_threshold": self.hits[v],
                    "median_iterations_to_threshold": self.median_iterations(v),
                    "elapsed_seconds": self.elapsed[v]}
                for v in VARIANTS
            },
        }

    def rows(self):
        """(variant, seed, iteration, value) rows for plotting."""
        for v in VARIANTS:
            for seed, trace in zip(self.seeds, self.traces[v]):
                for i, val in enumerate(trace):
                    yield v, seed, i, val


def run_bench(P: LabeledMatrix, plan: PartitionPlan, spec: CriterionSpec, base: RunConfig,
              seeds, threshold: Optional[float] = None) -> BenchResult:
    """Run both variants on each seed.

    The threshold defaults, per seed, to the plain GA's final best value.
    """
    ctx = build_context(P, plan, spec)
    seeds = [int(s) for s in seeds]
    out = BenchResult(base.niterations, seeds)
    for v in VARIANTS:
        out.traces[v], out.hits[v], out.elapsed[v] = [], [], 0.0
    for seed in seeds:
        for v in VARIANTS:
            res = run_lagat(P, plan, spec, variant_config(base, v).replace(seed=seed), ctx=ctx)
            out.traces[v].append(padded(res.trace, base.niterations))
            out.elapsed[v] += res.elapsed
        thr = out.traces["GA"][-1][-1] if threshold is None else threshold
        out.thresholds.append(thr)
        for v in VARIANTS:
            out.hits[v].append(iterations_to_threshold(out.traces[v][-1], thr))
    return out
