import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import GRID_OPTIMUM, grid_design
from subsetopt import CriterionSpec, LabeledMatrix, build_context, validate_partition, write_labeled_matrix
from subsetopt.cli import main
from subsetopt.criteria import EXTRA_NAMES, TABLE_NAMES

GRID_FLAGS = ["--ntoselect", "13", "--criterion", "DOPT", "--lambda", "1e-9", "--npop", "200",
              "--nelite", "5", "--mutprob", "0.5", "--mutintensity", "1", "--niterations", "200",
              "--minitbefstop", "50", "--seed", "3"]


@pytest.fixture
def grid_csv(tmp_path):
    path = tmp_path / "grid.csv"
    write_labeled_matrix(path, grid_design())
    return path


@pytest.fixture
def small_csv(tmp_path):
    rng = np.random.default_rng(0)
    M = LabeledMatrix(tuple(f"s{i:02d}" for i in range(12)), rng.normal(size=(12, 3)), ("a", "b", "c"))
    path = tmp_path / "small.csv"
    write_labeled_matrix(path, M)
    return path, M


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_select_grid13(grid_csv, tmp_path, capsys):
    out_path = tmp_path / "res.json"
    code, out, err = run(["select", "--data", grid_csv, *GRID_FLAGS, "--output", out_path], capsys)
    assert code == 0 and err == ""
    res = json.loads(out_path.read_text())
    assert res["solutions"][0]["rank"] == 1
    assert abs(res["solutions"][0]["value"] - GRID_OPTIMUM) < 1e-9
    assert set(res) == {"solutions", "trace", "seed", "evaluations", "elapsed_seconds"}


def test_unknown_criterion_exit_2(small_csv, capsys):
    code, out, err = run(["select", "--data", small_csv[0], "--ntoselect", "3", "--criterion", "NOSUCH"],
                         capsys)
    assert code == 2
    assert "unknown criterion" in err and err.count("\n") == 1 and out == ""


def test_unknown_flag_exit_2(small_csv, capsys):
    code, _, err = run(["select", "--data", small_csv[0], "--ntoselect", "3", "--bogus", "1"], capsys)
    assert code == 2 and err.count("\n") == 1


def test_missing_file_exit_2(tmp_path, capsys):
    code, _, err = run(["select", "--data", tmp_path / "nope.csv", "--ntoselect", "3"], capsys)
    assert code == 2 and err.count("\n") == 1


def test_bad_config_value_exit_2(small_csv, capsys):
    code, _, err = run(["select", "--data", small_csv[0], "--ntoselect", "3", "--mutprob", "2"], capsys)
    assert code == 2 and "mutprob" in err


def test_computation_failure_exit_1(tmp_path, capsys):
    P = LabeledMatrix(("a", "b", "c", "d"), np.vstack([np.zeros((1, 2)), np.ones((3, 2))]), ("u", "v"))
    path = tmp_path / "z.csv"
    write_labeled_matrix(path, P)
    test = tmp_path / "test.txt"
    test.write_text("a\n")
    code, _, err = run(["select", "--data", path, "--test", test, "--ntoselect", "2",
                        "--criterion", "CDMEAN", "--npop", "4", "--nelite", "1"], capsys)
    assert code == 1 and err.count("\n") == 1


def test_workers_byte_identical(small_csv, tmp_path, capsys):
    outs = []
    for w in (1, 8):
        path = tmp_path / f"w{w}.json"
        code, _, _ = run(["select", "--data", small_csv[0], "--ntoselect", "4", "--npop", "30",
                          "--niterations", "20", "--workers", w, "--seed", "5", "--output", path], capsys)
        assert code == 0
        d = json.loads(path.read_text())
        d.pop("elapsed_seconds")
        outs.append(json.dumps(d))
    assert outs[0] == outs[1]


def test_json_round_trip_reevaluation(small_csv, tmp_path, capsys):
    path = tmp_path / "r.json"
    run(["select", "--data", small_csv[0], "--ntoselect", "4", "--criterion", "CDMEAN2",
         "--lambda", "0.01", "--npop", "20", "--niterations", "10", "--output", path], capsys)
    res = json.loads(path.read_text())
    P = small_csv[1]
    ctx = build_context(P, validate_partition(P, ntoselect=4), CriterionSpec("CDMEAN2", lambda_=0.01))
    for sol in res["solutions"]:
        assert abs(ctx.evaluate(P.row_index(sol["members"])) - sol["value"]) < 1e-12


def test_select_csv_and_trace(small_csv, tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    code, out, _ = run(["select", "--data", small_csv[0], "--ntoselect", "3", "--npop", "10",
                        "--niterations", "6", "--minitbefstop", "50", "--format", "csv",
                        "--trace-csv", trace], capsys)
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["rank", "value", "members"] and rows[1][0] == "1"
    trows = list(csv.reader(trace.read_text().splitlines()))
    assert trows[0] == ["iteration", "value"] and len(trows) == 7


def test_config_file_and_flag_precedence(small_csv, tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("npop = 12\nniterations = 4\nminitbefstop = 100\nseed = 9\n")
    path = tmp_path / "r.json"
    run(["select", "--data", small_csv[0], "--ntoselect", "3", "--config", cfg,
         "--niterations", "3", "--output", path], capsys)
    res = json.loads(path.read_text())
    assert len(res["trace"]) == 3 and res["seed"] == 9


def test_init_pop_and_candidates(small_csv, tmp_path, capsys):
    cands = tmp_path / "cands.txt"
    cands.write_text("\n".join(f"s{i:02d}" for i in range(6)))
    test = tmp_path / "test.txt"
    test.write_text("s10\ns11\n")
    init = tmp_path / "init.txt"
    init.write_text("s00,s01\n")
    code, out, _ = run(["select", "--data", small_csv[0], "--candidates", cands, "--test", test,
                        "--ntoselect", "2", "--init_pop", init, "--npop", "8", "--niterations", "5"],
                       capsys)
    assert code == 0
    for sol in json.loads(out)["solutions"]:
        assert set(sol["members"]) <= {f"s{i:02d}" for i in range(6)}


def test_islands(small_csv, capsys):
    code, out, _ = run(["select", "--data", small_csv[0], "--ntoselect", "3", "--npop", "12",
                        "--niterations", "5", "--islands", "3", "--rounds", "2"], capsys)
    assert code == 0 and json.loads(out)["solutions"]


def test_log_iters_goes_to_stderr(small_csv, capsys):
    code, _, err = run(["select", "--data", small_csv[0], "--ntoselect", "3", "--npop", "10",
                        "--niterations", "4", "--log-iters", "2"], capsys)
    assert code == 0 and "iteration 0" in err and "iteration 2" in err


def test_enumerate_toy(tmp_path, capsys):
    P = LabeledMatrix(("a", "b", "c", "d"), [[0.0], [1.0], [2.0], [5.0]], ("x",))
    path = tmp_path / "t.csv"
    write_labeled_matrix(path, P)
    code, out, _ = run(["enumerate", "--data", path, "--ntoselect", "2", "--criterion", "MAXIMIN"], capsys)
    res = json.loads(out)
    assert code == 0 and res["subsets_evaluated"] == 6
    assert res["argmin_solutions"] == [["a", "d"]] and res["min_value"] == -5.0


def test_enumerate_too_large(small_csv, capsys):
    code, _, err = run(["enumerate", "--data", small_csv[0], "--ntoselect", "6", "--cap", "10"], capsys)
    assert code == 2 and "cap" in err


def test_enumerate_agrees_with_select(small_csv, capsys):
    _, out, _ = run(["enumerate", "--data", small_csv[0], "--ntoselect", "3", "--criterion", "AOPT"], capsys)
    enum = json.loads(out)
    _, out, _ = run(["select", "--data", small_csv[0], "--ntoselect", "3", "--criterion", "AOPT",
                     "--npop", "40", "--niterations", "60"], capsys)
    sel = json.loads(out)
    assert sel["solutions"][0]["value"] == enum["min_value"]


def test_bench_structure_and_infinite_threshold(small_csv, tmp_path, capsys):
    path = tmp_path / "b.json"
    code, _, _ = run(["bench", "--data", small_csv[0], "--ntoselect", "4", "--npop", "10",
                      "--niterations", "8", "--seeds", "3", "--threshold", "inf", "--output", path], capsys)
    assert code == 0
    res = json.loads(path.read_text())
    for v in ("GA", "LA-GA-T"):
        assert len(res["variants"][v]["traces"]) == 3
        assert all(len(t) == 8 for t in res["variants"][v]["traces"])
        assert res["variants"][v]["iterations_to_threshold"] == [0, 0, 0]


def test_bench_csv(small_csv, capsys):
    code, out, _ = run(["bench", "--data", small_csv[0], "--ntoselect", "4", "--npop", "10",
                        "--niterations", "5", "--seeds", "2", "--format", "csv"], capsys)
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["variant", "seed", "iteration", "value"]
    assert len(rows) == 1 + 2 * 2 * 5


def test_criteria_listing(capsys):
    code, out, err = run(["criteria"], capsys)
    assert code == 0 and err == ""
    names = [line.split()[0] for line in out.splitlines()]
    assert set(names) == set(TABLE_NAMES) | set(EXTRA_NAMES)


def test_criteria_json_names_accepted_by_select(capsys, tmp_path):
    _, out, _ = run(["criteria", "--format", "json"], capsys)
    cat = json.loads(out)
    assert {"name", "requires", "input_type", "formula"} <= set(cat[0])
    path = tmp_path / "x.csv"
    write_labeled_matrix(path, LabeledMatrix(("a", "b"), [[1.0], [2.0]], ("x",)))
    for entry in cat:
        code, _, err = run(["select", "--data", path, "--ntoselect", "99", "--criterion", entry["name"]],
                           capsys)
        assert code == 2 and "unknown criterion" not in err


def test_column_criteria_with_response(tmp_path, capsys):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(50, 5))
    y = 2 * X[:, 0] - X[:, 2] + 0.1 * rng.normal(size=50)
    M = LabeledMatrix(tuple(f"o{i}" for i in range(50)), np.column_stack([X, y]),
                      ("f0", "f1", "f2", "f3", "f4", "y"))
    path = tmp_path / "d.csv"
    write_labeled_matrix(path, M)
    code, out, _ = run(["enumerate", "--data", path, "--ntoselect", "2", "--criterion", "AICOLS",
                        "--response_column", "y"], capsys)
    assert code == 0 and json.loads(out)["argmin_solutions"] == [["f0", "f2"]]
    code, out, _ = run(["select", "--data", path, "--ntoselect", "45", "--criterion", "DFBETAS",
                        "--response_column", "y", "--npop", "10", "--niterations", "3"], capsys)
    assert code == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "subsetopt", "criteria"], capture_output=True, text=True)
    assert proc.returncode == 0 and "DOPT" in proc.stdout and proc.stderr == ""
