"""Labeled matrices, partitions, run configuration and results."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DuplicateId,
    EmptyInput,
    OverlapError,
    ParseError,
    SizeError,
    UnknownId,
)

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

#: Canonical form of a solution: identifiers sorted as strings.
SubsetSolution = tuple


def canonical(ids: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(ids))


def _check_ids(ids: Sequence[str], what: str) -> tuple[str, ...]:
    ids = tuple(str(i) for i in ids)
    seen = set()
    for i in ids:
        if not i:
            raise ParseError(f"empty {what} identifier")
        if i in seen:
            raise DuplicateId(f"duplicate {what} identifier {i!r}")
        seen.add(i)
    return ids


@dataclass(frozen=True, eq=False)
class LabeledMatrix:
    """Dense matrix with unique row identifiers and optional column identifiers.

    The values array is copied and made read-only, so instances can be shared
    freely between worker threads.
    """

    row_ids: tuple[str, ...]
    values: np.ndarray
    col_ids: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, order="C")
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.size == 0:
            raise EmptyInput("matrix must be two-dimensional and non-empty")
        if not np.all(np.isfinite(values)):
            raise ParseError("matrix contains non-finite entries")
        values.setflags(write=False)
        row_ids = _check_ids(self.row_ids, "row")
        if len(row_ids) != values.shape[0]:
            raise ParseError(f"{len(row_ids)} row ids for {values.shape[0]} rows")
        col_ids = None
        if self.col_ids is not None:
            col_ids = _check_ids(self.col_ids, "column")
            if len(col_ids) != values.shape[1]:
                raise ParseError(f"{len(col_ids)} column ids for {values.shape[1]} columns")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "row_ids", row_ids)
        object.__setattr__(self, "col_ids", col_ids)
        object.__setattr__(self, "_row_index", {r: i for i, r in enumerate(row_ids)})

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def row_index(self, ids: Iterable[str]) -> np.ndarray:
        """Row positions of ``ids``; raises UnknownId for absent identifiers."""
        idx = self._row_index
        out = []
        for i in ids:
            try:
                out.append(idx[i])
            except KeyError:
                raise UnknownId(f"unknown identifier {i!r}") from None
        return np.asarray(out, dtype=np.intp)

    def transpose(self) -> "LabeledMatrix":
        if self.col_ids is None:
            raise ParseError("cannot transpose a matrix without column identifiers")
        return LabeledMatrix(self.col_ids, self.values.T, self.row_ids)

    def column(self, col_id: str) -> np.ndarray:
        if self.col_ids is None or col_id not in self.col_ids:
            raise UnknownId(f"unknown column {col_id!r}")
        return self.values[:, self.col_ids.index(col_id)].copy()

    def drop_columns(self, names: Iterable[str]) -> "LabeledMatrix":
        names = set(names)
        keep = [j for j, c in enumerate(self.col_ids) if c not in names]
        return LabeledMatrix(self.row_ids, self.values[:, keep],
                             tuple(self.col_ids[j] for j in keep))


def subset_rows(P: LabeledMatrix, ids: Sequence[str]) -> LabeledMatrix:
    """Rows of ``P`` in the order given, column labels preserved."""
    idx = P.row_index(ids)
    return LabeledMatrix(tuple(ids), P.values[idx], P.col_ids)


def load_labeled_matrix(path, has_col_header: bool = True) -> LabeledMatrix:
    """Read a CSV whose first column holds row identifiers."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if not rows:
        raise EmptyInput(f"{path}: no data")
    col_ids = None
    if has_col_header:
        col_ids = [c.strip() for c in rows[0][1:]]
        rows = rows[1:]
        if not rows:
            raise EmptyInput(f"{path}: header but no data rows")
    width = len(rows[0])
    if width < 2:
        raise ParseError(f"{path}: need an identifier column and at least one value column")
    if col_ids is not None and len(col_ids) != width - 1:
        raise ParseError(f"{path}: header has {len(col_ids)} columns, data has {width - 1}")
    row_ids, values = [], []
    lineno_offset = 2 if has_col_header else 1
    for k, r in enumerate(rows):
        if len(r) != width:
            raise ParseError(f"{path}:{k + lineno_offset}: ragged row ({len(r)} cells, expected {width})")
        row_ids.append(r[0].strip())
        try:
            vals = [float(c) for c in r[1:]]
        except ValueError:
            raise ParseError(f"{path}:{k + lineno_offset}: non-numeric cell") from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError(f"{path}:{k + lineno_offset}: non-finite cell")
        values.append(vals)
    return LabeledMatrix(tuple(row_ids), np.asarray(values), None if col_ids is None else tuple(col_ids))


def write_labeled_matrix(path, M: LabeledMatrix, id_header: str = "id") -> None:
    # repr() of a float round-trips exactly
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if M.col_ids is not None:
            w.writerow([id_header, *M.col_ids])
        for rid, row in zip(M.row_ids, M.values):
            w.writerow([rid, *(repr(float(v)) for v in row)])


def read_id_list(path) -> list[str]:
    with Path(path).open(encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


@dataclass(frozen=True)
class PartitionPlan:
    candidates: tuple[str, ...]
    test: Optional[tuple[str, ...]]
    ntoselect: int


def validate_partition(P: LabeledMatrix, candidates: Optional[Sequence[str]] = None,
                       test: Optional[Sequence[str]] = None,
                       ntoselect: int = 1) -> PartitionPlan:
    """Check identifiers and sizes; candidates default to every row not in ``test``."""
    test_t = None
    if test is not None:
        test_t = canonical(_check_ids(test, "test"))
        P.row_index(test_t)
    if candidates is None:
        excluded = set(test_t or ())
        cand = canonical(r for r in P.row_ids if r not in excluded)
    else:
        cand = canonical(_check_ids(candidates, "candidate"))
        P.row_index(cand)
    if test_t is not None:
        overlap = set(cand) & set(test_t)
        if overlap:
            raise OverlapError(f"{len(overlap)} identifiers are both candidates and test, e.g. {min(overlap)!r}")
    ntoselect = int(ntoselect)
    if not 1 <= ntoselect <= len(cand):
        raise SizeError(f"ntoselect={ntoselect} outside [1, {len(cand)}]")
    return PartitionPlan(cand, test_t, ntoselect)


@dataclass
class RunConfig:
    """Genetic-algorithm settings; defaults are the recommended ones."""

    npop: int = 100
    nelite: int = 5
    keepbest: bool = True
    tabu: bool = False
    tabumemsize: int = 1
    mutprob: float = 0.8
    mutintensity: float = 1.0
    niterations: int = 500
    minitbefstop: int = 100
    niterreg: int = 5
    lambda_: float = 1e-6
    tolconv: float = 1e-7
    workers: int = 1
    seed: int = 0
    init_pop: Optional[list] = None

    def __post_init__(self):
        if self.npop < 2:
            raise ConfigError("npop must be at least 2")
        if not 1 <= self.nelite < self.npop:
            raise ConfigError("need 1 <= nelite < npop")
        if not 0.0 <= self.mutprob <= 1.0:
            raise ConfigError("mutprob must lie in [0, 1]")
        if self.mutintensity < 0:
            raise ConfigError("mutintensity must be nonnegative")
        if self.tabumemsize < 0:
            raise ConfigError("tabumemsize must be nonnegative")
        if self.niterations < 1 or self.minitbefstop < 1:
            raise ConfigError("niterations and minitbefstop must be positive")
        if self.niterreg < 0:
            raise ConfigError("niterreg must be nonnegative")
        if not self.lambda_ > 0 or not self.tolconv > 0:
            raise ConfigError("lambda and tolconv must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


_CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def config_key(name: str) -> str:
    """Map an external key (``lambda``) to the dataclass field (``lambda_``)."""
    return "lambda_" if name == "lambda" else name


def config_from_mapping(values: dict, base: Optional[RunConfig] = None) -> RunConfig:
    base = base or RunConfig()
    changes = {}
    for key, val in values.items():
        name = config_key(key)
        if name not in _CONFIG_FIELDS:
            raise ConfigError(f"unknown configuration key {key!r}")
        default = getattr(RunConfig(), name)
        if isinstance(default, bool):
            if not isinstance(val, bool):
                raise ConfigError(f"{key} must be true or false")
        elif isinstance(default, int) and not isinstance(default, bool):
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"{key} must be an integer")
        elif isinstance(default, float):
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"{key} must be a number")
            val = float(val)
        changes[name] = val
    return base.replace(**changes)


def load_config(path, base: Optional[RunConfig] = None) -> RunConfig:
    """Read ``key = value`` settings (TOML syntax) whose keys are RunConfig field names."""
    try:
        with Path(path).open("rb") as fh:
            values = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_mapping(values, base)


@dataclass
class RunResult:
    """Outcome of one optimisation run.

    ``ranked_solutions`` holds up to ``nelite`` distinct solutions in
    ascending criterion order; ``trace`` holds the best criterion value of
    each completed iteration.
    """

    ranked_solutions: list
    trace: list
    seed_used: int
    evaluations: int
    elapsed: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def best(self) -> tuple:
        return self.ranked_solutions[0]

    @property
    def best_value(self) -> float:
        return self.ranked_solutions[0][1]

    def to_dict(self, with_timing: bool = True) -> dict[str, Any]:
        out = {
            "solutions": [
                {"rank": k + 1, "members": list(sol), "value": float(val)}
                for k, (sol, val) in enumerate(self.ranked_solutions)
            ],
            "trace": [float(v) for v in self.trace],
            "seed": int(self.seed_used),
            "evaluations": int(self.evaluations),
        }
        if with_timing:
            out["elapsed_seconds"] = self.elapsed
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(**kw), indent=2)
