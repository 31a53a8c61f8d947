"""Criterion registry, parameter bundle and per-run evaluation context.

Every criterion maps a training subset to a scalar that is *minimised*.
Criteria receive the subset as an integer array of row positions into
``ctx.P.values``; ``ctx.ids(rows)`` recovers identifiers when needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Callable, Mapping, Optional

import numpy as np

from ..data import LabeledMatrix, PartitionPlan
from ..errors import (
    ComputationError,
    DuplicateName,
    MissingParameter,
    ShadowingBuiltin,
    SizeError,
    UnknownCriterion,
    UnsupportedCriterion,
    ValidationError,
)


@dataclass(frozen=True, eq=False)
class CriterionSpec:
    """Which criterion to use and the parameters it needs.

    ``lambda_`` is the ridge shift used by the design criteria.  ``weight`` is
    the trade-off weight of the compound criteria (GAININB, FITLOGDET) and is
    deliberately separate from the shift.
    """

    name: str = "PEVMEAN"
    lambda_: float = 1e-6
    contrast: Optional[np.ndarray] = None
    kernel_inverse: Optional[LabeledMatrix] = None
    fixed_design: Any = None
    target_kernel: Optional[np.ndarray] = None
    response: Optional[np.ndarray] = None
    weight: Optional[float] = None
    vg: Optional[np.ndarray] = None
    ve: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.lambda_ > 0:
            raise ValidationError("lambda must be positive")
        if self.weight is not None and not 0.0 <= self.weight <= 1.0:
            raise ValidationError("weight must lie in [0, 1]")
        for name in ("contrast", "target_kernel", "response"):
            val = getattr(self, name)
            if val is not None:
                arr = np.array(val, dtype=np.float64)
                if not np.all(np.isfinite(arr)):
                    raise ValidationError(f"{name} has non-finite entries")
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class Criterion:
    name: str
    func: Optional[Callable] = None
    batch: Optional[Callable] = None
    requires: tuple = ()
    input_type: str = "X"
    selects: str = "rows"
    formula: str = ""
    prepare: Optional[Callable] = None
    check: Optional[Callable] = None
    min_select: int = 1
    builtin: bool = True

    def evaluate(self, train: np.ndarray, ctx: "CriterionContext") -> float:
        if self.batch is not None:
            return float(self.batch(train[None, :], ctx)[0])
        return float(self.func(train, ctx))

    def evaluate_many(self, trains: np.ndarray, ctx: "CriterionContext") -> np.ndarray:
        """Values for a ``(B, n)`` array of subsets."""
        trains = np.asarray(trains, dtype=np.intp)
        if self.batch is not None:
            return np.asarray(self.batch(trains, ctx), dtype=np.float64)
        return np.array([float(self.func(t, ctx)) for t in trains], dtype=np.float64)


_BUILTINS: dict[str, Criterion] = {}
_CUSTOM: dict[str, Criterion] = {}


def _register_builtin(crit: Criterion) -> Criterion:
    _BUILTINS[crit.name] = crit
    return crit


def register_custom(name: str, fn: Callable, *, requires: tuple = (),
                    selects: str = "rows", replace: bool = False) -> Criterion:
    """Make ``fn(train_rows, ctx) -> float`` available under ``name``.

    Registration is not thread-safe; do it during setup, before any run.
    """
    if name in _BUILTINS:
        raise ShadowingBuiltin(f"{name!r} is a built-in criterion")
    if name in _CUSTOM and not replace:
        raise DuplicateName(f"criterion {name!r} is already registered")
    crit = Criterion(name, func=fn, requires=tuple(requires), input_type="custom",
                     selects=selects, formula="user defined", builtin=False)
    _CUSTOM[name] = crit
    return crit


def unregister_custom(name: str) -> None:
    _CUSTOM.pop(name, None)


def get_criterion(name: str) -> Criterion:
    try:
        return _BUILTINS[name]
    except KeyError:
        pass
    try:
        return _CUSTOM[name]
    except KeyError:
        raise UnknownCriterion(f"unknown criterion {name!r}") from None


def builtin_names() -> list[str]:
    return list(_BUILTINS)


def catalog() -> list[dict]:
    """Name, required parameters, input type and formula of each built-in."""
    return [
        {"name": c.name, "requires": list(c.requires), "input_type": c.input_type,
         "selects": c.selects, "formula": c.formula}
        for c in _BUILTINS.values()
    ]


@dataclass(frozen=True, eq=False)
class CriterionContext:
    """Everything a criterion may read during a run.  Never mutated."""

    P: LabeledMatrix
    plan: PartitionPlan
    spec: CriterionSpec
    criterion: Criterion
    candidate_rows: np.ndarray
    test_rows: Optional[np.ndarray]
    cache: Mapping = field(default_factory=dict)

    def ids(self, rows) -> tuple[str, ...]:
        return tuple(self.P.row_ids[i] for i in rows)

    def target_rows(self, trains: np.ndarray) -> np.ndarray:
        """Target rows per subset: the test set, or the rows of P outside the subset."""
        trains = np.atleast_2d(trains)
        if self.test_rows is not None:
            return np.broadcast_to(self.test_rows, (trains.shape[0], self.test_rows.size))
        N = self.P.shape[0]
        mask = np.ones((trains.shape[0], N), dtype=bool)
        mask[np.arange(trains.shape[0])[:, None], trains] = False
        return np.nonzero(mask)[1].reshape(trains.shape[0], N - trains.shape[1])

    def evaluate(self, train) -> float:
        return self.criterion.evaluate(np.asarray(train, dtype=np.intp), self)

    def evaluate_many(self, trains) -> np.ndarray:
        return self.criterion.evaluate_many(trains, self)


def build_context(P: LabeledMatrix, plan: PartitionPlan, spec: CriterionSpec) -> CriterionContext:
    """Validate ``spec`` against the data and precompute the run cache."""
    crit = get_criterion(spec.name)
    if spec.vg is not None or spec.ve is not None:
        raise UnsupportedCriterion("multi-trait criteria (Vg/Ve) are not supported")
    for param in crit.requires:
        if getattr(spec, param) is None:
            raise MissingParameter(f"criterion {crit.name} requires parameter {param!r}")
    if plan.ntoselect < crit.min_select:
        raise SizeError(f"criterion {crit.name} needs ntoselect >= {crit.min_select}")
    cand_rows = P.row_index(plan.candidates)
    test_rows = None if plan.test is None else P.row_index(plan.test)
    ctx = CriterionContext(P, plan, spec, crit, cand_rows, test_rows)
    if crit.check is not None:
        crit.check(ctx)
    if crit.prepare is not None:
        cache = crit.prepare(ctx)
        for v in cache.values():
            if isinstance(v, np.ndarray):
                v.setflags(write=False)
        object.__setattr__(ctx, "cache", MappingProxyType(dict(cache)))
    return ctx


def tag_solution(exc: ComputationError, ids) -> ComputationError:
    exc.solution = tuple(ids)
    if exc.args:
        exc.args = (f"{exc.args[0]} [solution: {', '.join(ids)}]",) + exc.args[1:]
    return exc
