"""Optimal subset selection with a look-ahead genetic algorithm and tabu memory."""

from .bench import run_bench
from .criteria import (
    CriterionSpec,
    build_context,
    catalog,
    get_criterion,
    register_custom,
    unregister_custom,
    vanraden_amat,
)
from .data import (
    LabeledMatrix,
    PartitionPlan,
    RunConfig,
    RunResult,
    load_config,
    load_labeled_matrix,
    validate_partition,
    write_labeled_matrix,
)
from .engine import lookahead_solution, run_islands, run_lagat
from .errors import ComputationError, SubsetOptError, ValidationError
from .oracle import EnumerationResult, enumerate_best, random_baseline

__version__ = "0.1.0"

__all__ = [
    "CriterionSpec", "build_context", "catalog", "get_criterion", "register_custom",
    "unregister_custom", "vanraden_amat", "LabeledMatrix", "PartitionPlan", "RunConfig",
    "RunResult", "load_config", "load_labeled_matrix", "validate_partition",
    "write_labeled_matrix", "lookahead_solution", "run_islands", "run_lagat",
    "ComputationError", "SubsetOptError", "ValidationError", "EnumerationResult",
    "enumerate_best", "random_baseline", "run_bench",
]
