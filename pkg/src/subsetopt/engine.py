"""Look-ahead genetic algorithm with tabu memory, plus a simple island model.

Solutions are held internally as sorted tuples of candidate positions (indices
into ``plan.candidates``).  Candidates are kept in sorted id order, so tuple
order is also lexicographic id order and tuple equality is set equality.

All random draws happen on the coordinating thread from one PCG64 stream.
Worker threads only evaluate fixed-size chunks of the population, so results
do not depend on the worker count.
"""

from __future__ import annotations

import logging
import math
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

from .criteria.base import CriterionContext, CriterionSpec, build_context, tag_solution
from .data import LabeledMatrix, PartitionPlan, RunConfig, RunResult
from .errors import ComputationError, ConfigError, InvalidInitPop

log = logging.getLogger(__name__)

LOOKAHEAD_SHRINKAGE = 1e-6
TABU_RETRY_CAP = 50
EVAL_CHUNK = 64


# -- population ---------------------------------------------------------------

def encode(ids, plan: PartitionPlan) -> tuple:
    """Identifiers -> sorted candidate positions.  Raises InvalidInitPop."""
    ids = list(ids)
    if len(ids) != plan.ntoselect:
        raise InvalidInitPop(f"initial solution has {len(ids)} members, expected {plan.ntoselect}")
    if len(set(ids)) != len(ids):
        raise InvalidInitPop("initial solution has duplicate members")
    pos = {c: i for i, c in enumerate(plan.candidates)}
    try:
        return tuple(sorted(pos[i] for i in ids))
    except KeyError as exc:
        raise InvalidInitPop(f"initial solution member {exc.args[0]!r} is not a candidate") from None


def decode(sol, plan: PartitionPlan) -> tuple:
    return tuple(plan.candidates[i] for i in sol)


def random_solution(m: int, n: int, rng: np.random.Generator) -> tuple:
    return tuple(sorted(int(i) for i in rng.choice(m, size=n, replace=False)))


def init_population(plan: PartitionPlan, config: RunConfig, rng: np.random.Generator) -> list:
    """``npop`` solutions: user ``init_pop`` first (truncated to npop), the rest uniform."""
    pop = [encode(s, plan) for s in (config.init_pop or [])][: config.npop]
    m = len(plan.candidates)
    while len(pop) < config.npop:
        pop.append(random_solution(m, plan.ntoselect, rng))
    return pop


# -- evaluation ---------------------------------------------------------------

def _eval_chunk(ctx: CriterionContext, rows: np.ndarray) -> np.ndarray:
    try:
        return ctx.evaluate_many(rows)
    except ComputationError as exc:
        # locate the offending solution
        for r in rows:
            try:
                ctx.evaluate(r)
            except ComputationError as inner:
                raise tag_solution(inner, ctx.ids(r)) from None
        raise tag_solution(exc, ctx.ids(rows[0])) from None


def evaluate_population(pop, ctx: CriterionContext, workers: int = 1,
                        executor: Optional[ThreadPoolExecutor] = None) -> np.ndarray:
    """Criterion value of every solution, in population order.

    The population is split into chunks of a fixed size, independent of the
    number of workers, and chunks are mapped over a thread pool.
    """
    if len(pop) == 0:
        return np.empty(0)
    rows = ctx.candidate_rows[np.asarray(pop, dtype=np.intp)]
    chunks = [rows[i:i + EVAL_CHUNK] for i in range(0, len(rows), EVAL_CHUNK)]
    if workers <= 1 or len(chunks) == 1:
        parts = [_eval_chunk(ctx, c) for c in chunks]
    elif executor is not None:
        parts = list(executor.map(lambda c: _eval_chunk(ctx, c), chunks))
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda c: _eval_chunk(ctx, c), chunks))
    return np.concatenate(parts)


class _Evaluator:
    """Memoised population evaluation for one run."""

    def __init__(self, ctx, workers):
        self.ctx = ctx
        self.workers = workers
        self.memo: dict[tuple, float] = {}
        self.executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def __call__(self, pop) -> np.ndarray:
        fresh = list(dict.fromkeys(s for s in pop if s not in self.memo))
        if fresh:
            vals = evaluate_population(fresh, self.ctx, self.workers, self.executor)
            self.memo.update(zip(fresh, vals.tolist()))
        return np.array([self.memo[s] for s in pop])

    def close(self):
        if self.executor is not None:
            self.executor.shutdown()


# -- operators ----------------------------------------------------------------

def elite_order(pop, fitness) -> list:
    """Population positions sorted by (fitness, members)."""
    return sorted(range(len(pop)), key=lambda i: (fitness[i], pop[i]))


def select_elites(pop, fitness, nelite: int) -> list:
    return [pop[i] for i in elite_order(pop, fitness)[:nelite]]


def lookahead_solution(pop, fitness, m: int, n: int) -> tuple:
    """Ridge-regress fitness on the 0/1 membership coding; keep the n smallest effects."""
    B = np.zeros((len(pop), m))
    for r, sol in enumerate(pop):
        B[r, list(sol)] = 1.0
    y = np.asarray(fitness, dtype=np.float64)
    finite = np.isfinite(y)
    if not finite.any():
        y = np.zeros_like(y)
    elif not finite.all():
        y = np.where(finite, y, y[finite].max())
    y = y - y.mean()
    if np.ptp(y) == 0.0:
        y = np.zeros_like(y)
    s = LOOKAHEAD_SHRINKAGE * float(np.sum(B * B)) / m
    if len(pop) < m:
        G = B @ B.T + s * np.eye(len(pop))
        e = B.T @ np.linalg.solve(G, y)
    else:
        G = B.T @ B + s * np.eye(m)
        e = np.linalg.solve(G, B.T @ y)
    order = np.lexsort((np.arange(m), e))
    return tuple(sorted(int(i) for i in order[:n]))


def crossover(a, b, rng: np.random.Generator) -> tuple:
    """Sample len(a) members without replacement from a | b; shared members weigh 2."""
    if a == b:
        return a
    union = sorted(set(a) | set(b))
    shared = set(a) & set(b)
    w = np.array([2.0 if u in shared else 1.0 for u in union])
    pick = rng.choice(len(union), size=len(a), replace=False, p=w / w.sum())
    return tuple(sorted(union[i] for i in pick))


def draw_mutation_count(rng: np.random.Generator, mutintensity: float, n: int) -> int:
    return int(min(max(rng.poisson(mutintensity), 1), n))


def swap_mutation(sol, m: int, k: int, rng: np.random.Generator) -> tuple:
    """k successive swaps of a uniform member for a uniform non-member."""
    members = list(sol)
    inside = set(members)
    others = [c for c in range(m) if c not in inside]
    if not others:
        return tuple(sol)
    for _ in range(k):
        i = int(rng.integers(len(members)))
        j = int(rng.integers(len(others)))
        members[i], others[j] = others[j], members[i]
    return tuple(sorted(members))


def mutate(sol, m: int, config: RunConfig, rng: np.random.Generator) -> tuple:
    if rng.random() >= config.mutprob:
        return sol
    k = draw_mutation_count(rng, config.mutintensity, len(sol))
    return swap_mutation(sol, m, k, rng)


def tabu_filter(sol, memory) -> bool:
    """True if ``sol`` is acceptable, i.e. absent from every stored generation."""
    return not any(sol in gen for gen in memory)


# -- main loop ----------------------------------------------------------------

def _ranked(memo: dict, k: int, plan) -> list:
    best = sorted(memo.items(), key=lambda kv: (kv[1], kv[0]))[:k]
    return [(decode(s, plan), float(v)) for s, v in best]


def run_lagat(P: LabeledMatrix, plan: PartitionPlan, spec: CriterionSpec, config: RunConfig,
              on_generation: Optional[Callable[[dict], None]] = None,
              log_iters: int = 0, ctx: Optional[CriterionContext] = None) -> RunResult:
    """Minimise the criterion over ntoselect-subsets of the candidates.

    ``on_generation`` receives, for each evaluated generation, a dict with the
    iteration number, the population (as id tuples), its fitness and the origin
    of each member (init, lookahead, elite, offspring or forced).
    """
    t0 = time.perf_counter()
    if ctx is None:
        ctx = build_context(P, plan, spec)
    rng = np.random.default_rng(config.seed)
    m, n = len(plan.candidates), plan.ntoselect
    use_tabu = config.tabu and config.tabumemsize > 0
    memory: deque = deque(maxlen=max(config.tabumemsize, 1))

    pop = init_population(plan, config, rng)
    n_user = min(len(config.init_pop or []), config.npop)
    origins = ["init"] * len(pop)
    evaluator = _Evaluator(ctx, config.workers)
    trace: list[float] = []
    ref = math.inf
    stall = 0
    forced = rejected = 0
    stop_reason = "niterations"
    try:
        for it in range(config.niterations):
            fit = evaluator(pop)
            gen_best = float(fit.min())
            trace.append(gen_best)
            if on_generation is not None:
                on_generation({"iteration": it, "population": [decode(s, plan) for s in pop],
                               "fitness": fit.copy(), "origins": list(origins),
                               "n_user_init": n_user if it == 0 else 0})
            if log_iters and it % log_iters == 0:
                log.info("iteration %d best %.12g", it, gen_best)

            best_so_far = min(evaluator.memo.values())
            if it == 0 or ref - best_so_far > config.tolconv:
                ref = best_so_far
                stall = 0
            else:
                stall += 1
            if stall >= config.minitbefstop:
                stop_reason = "converged"
                break
            if it == config.niterations - 1:
                break

            order = elite_order(pop, fit)
            elites = [pop[i] for i in order[: config.nelite]]
            nxt, nxt_origin = [], []
            if it < config.niterreg:
                nxt.append(lookahead_solution(pop, fit, m, n))
                nxt_origin.append("lookahead")
            if config.keepbest:
                nxt.append(elites[0])
                nxt_origin.append("elite")
            if use_tabu:
                memory.append(frozenset(pop))
            consecutive = 0
            while len(nxt) < config.npop:
                ia, ib = rng.integers(len(elites), size=2)
                child = mutate(crossover(elites[ia], elites[ib], rng), m, config, rng)
                origin = "offspring"
                if use_tabu and not tabu_filter(child, memory):
                    consecutive += 1
                    rejected += 1
                    if consecutive <= TABU_RETRY_CAP:
                        continue
                    child = swap_mutation(child, m, 1, rng)
                    origin = "forced"
                    forced += 1
                consecutive = 0
                nxt.append(child)
                nxt_origin.append(origin)
            pop, origins = nxt[: config.npop], nxt_origin[: config.npop]
    finally:
        evaluator.close()

    return RunResult(
        ranked_solutions=_ranked(evaluator.memo, config.nelite, plan),
        trace=trace,
        seed_used=config.seed,
        evaluations=len(evaluator.memo),
        elapsed=time.perf_counter() - t0,
        diagnostics={"iterations": len(trace), "stop_reason": stop_reason,
                     "tabu_rejections": rejected, "tabu_forced": forced},
    )


# -- island model -------------------------------------------------------------

def derive_seed(seed: int, island: int, round_: int) -> int:
    """Child seed for an island run, a pure function of its coordinates."""
    return int(np.random.SeedSequence([seed, island, round_]).generate_state(1, np.uint64)[0])


def run_islands(P: LabeledMatrix, plan: PartitionPlan, spec: CriterionSpec, base_config: RunConfig,
                islands: int, rounds: int, on_round: Optional[Callable[[int, list], None]] = None
                ) -> RunResult:
    """Independent runs whose pooled elites seed the next round.

    Rounds ``0 .. rounds-2`` run ``islands`` searches each; round ``rounds-1``
    is one consolidating run started from the pooled elites.
    """
    if islands < 1 or rounds < 1:
        raise ConfigError("islands and rounds must be positive")
    ctx = build_context(P, plan, spec)
    init = base_config.init_pop
    total = 0
    for r in range(rounds - 1):
        pooled = []
        for i in range(islands):
            cfg = base_config.replace(seed=derive_seed(base_config.seed, i, r), init_pop=init)
            res = run_lagat(P, plan, spec, cfg, ctx=ctx)
            total += res.evaluations
            pooled.extend(list(sol) for sol, _ in res.ranked_solutions)
        if on_round is not None:
            on_round(r, pooled)
        init = pooled
    cfg = base_config.replace(seed=derive_seed(base_config.seed, 0, rounds - 1), init_pop=init)
    res = run_lagat(P, plan, spec, cfg, ctx=ctx)
    res.diagnostics["island_evaluations"] = total + res.evaluations
    return res
