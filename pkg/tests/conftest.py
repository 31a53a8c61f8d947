import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from subsetopt import CriterionSpec, LabeledMatrix, validate_partition  # noqa: E402

GRID_OPTIMUM = -21.3096195830339709687
GRID_KNOWN = ("x1", "x2", "x3", "x5", "x6", "x10", "x11", "x13", "x15", "x21", "x22", "x24", "x25")


def grid_design():
    """25-point quadratic response-surface design on the {-2..2}^2 grid."""
    pts = [(a, b) for b in range(-2, 3) for a in range(-2, 3)]
    X = np.array([[1, a, b, a * a, b * b, a * b] for a, b in pts], dtype=float)
    return LabeledMatrix(tuple(f"x{i + 1}" for i in range(25)), X, ("one", "a", "b", "a2", "b2", "ab"))


@pytest.fixture
def grid13():
    P = grid_design()
    return P, validate_partition(P, ntoselect=13), CriterionSpec("DOPT", lambda_=1e-9)


def random_design(rng, N=10, p=3, prefix="r"):
    return LabeledMatrix(tuple(f"{prefix}{i:02d}" for i in range(N)), rng.normal(size=(N, p)))


# -- acceptance report --------------------------------------------------------

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = "SKIP" if report.skipped else ("PASS" if report.passed else "FAIL")
        _ACCEPTANCE[name] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda s: int(s.split("_")[2])):
        terminalreporter.write_line(f"{_ACCEPTANCE[name]:<5} {name}")
