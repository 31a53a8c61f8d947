"""Command-line interface: ``subsetopt {select,enumerate,bench,criteria}``.

Exit codes: 0 success, 1 computation failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .bench import run_bench
from .criteria import CriterionSpec, catalog, get_criterion
from .data import (
    LabeledMatrix,
    RunConfig,
    load_config,
    load_labeled_matrix,
    read_id_list,
    validate_partition,
)
from .engine import run_islands, run_lagat
from .errors import ComputationError, ConfigError, ParseError, SubsetOptError, ValidationError
from .oracle import DEFAULT_CAP, enumerate_best

RUN_FLAGS = {
    "npop": int, "nelite": int, "tabumemsize": int, "mutprob": float, "mutintensity": float,
    "niterations": int, "minitbefstop": int, "niterreg": int, "tolconv": float,
    "workers": int, "seed": int,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# -- argument parsing ---------------------------------------------------------

def _add_problem_args(p):
    p.add_argument("--data", required=True, help="CSV with row identifiers in the first column")
    p.add_argument("--candidates", help="file with one candidate identifier per line")
    p.add_argument("--test", help="file with one test identifier per line")
    p.add_argument("--ntoselect", type=int, required=True)
    p.add_argument("--criterion", default="PEVMEAN")
    p.add_argument("--lambda", dest="lambda_", type=float, default=None)
    p.add_argument("--weight", type=float)
    p.add_argument("--contrast_path", help="numeric CSV, no identifiers")
    p.add_argument("--kinv_path", help="labeled CSV of the inverse relationship matrix")
    p.add_argument("--response_column")
    p.add_argument("--fixed_design_path", help="labeled CSV of fixed-effect covariates")
    p.add_argument("--target_kernel_path", help="labeled CSV of the target kernel")
    p.add_argument("--output", help="result file (default: standard output)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _add_run_args(p):
    for name, typ in RUN_FLAGS.items():
        p.add_argument(f"--{name}", type=typ, default=None)
    p.add_argument("--keepbest", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--tabu", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--init_pop", help="file with one comma-separated solution per line")
    p.add_argument("--config", help="TOML file of RunConfig settings")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="subsetopt", description="Optimal subset selection with a "
                     "look-ahead genetic algorithm.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("select", help="search for the best subset")
    _add_problem_args(p)
    _add_run_args(p)
    p.add_argument("--islands", type=int, default=1)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--trace_csv", "--trace-csv", dest="trace_csv")
    p.add_argument("--log_iters", "--log-iters", dest="log_iters", type=int, default=0)

    p = sub.add_parser("enumerate", help="exhaustive search (small instances)")
    _add_problem_args(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--tie_tolerance", type=float, default=1e-9)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)

    p = sub.add_parser("bench", help="paired-seed GA vs LA-GA-T convergence traces")
    _add_problem_args(p)
    _add_run_args(p)
    p.add_argument("--seeds", type=int, default=20, help="number of paired seeds")
    p.add_argument("--threshold", type=float, default=None,
                   help="target value (default: the plain GA's final best, per seed)")

    p = sub.add_parser("criteria", help="list the built-in criteria")
    p.add_argument("--format", choices=("text", "json"), default="text")
    return parser


# -- input assembly -----------------------------------------------------------

def _numeric_csv(path) -> np.ndarray:
    try:
        A = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return A


def _read_init_pop(path):
    with Path(path).open(encoding="utf-8") as fh:
        return [[t.strip() for t in line.split(",") if t.strip()] for line in fh if line.strip()]


def run_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    changes = {k: getattr(args, k) for k in (*RUN_FLAGS, "keepbest", "tabu")
               if getattr(args, k) is not None}
    if args.lambda_ is not None:
        changes["lambda_"] = args.lambda_
    if args.init_pop:
        changes["init_pop"] = _read_init_pop(args.init_pop)
    return cfg.replace(**changes)


def load_problem(args, lam: float):
    """Matrix, partition plan and criterion spec from the common flags."""
    crit = get_criterion(args.criterion)
    P = load_labeled_matrix(args.data)
    response = None
    if args.response_column is not None:
        response = P.column(args.response_column)
        if crit.selects == "columns":
            P = P.drop_columns([args.response_column])
        else:
            # row criteria read the response from column 0
            rest = [c for c in P.col_ids if c != args.response_column]
            keep = [P.col_ids.index(c) for c in rest]
            P = LabeledMatrix(P.row_ids, np.column_stack([response, P.values[:, keep]]),
                              (args.response_column, *rest))
            response = None
    if crit.selects == "columns":
        P = P.transpose()

    kinv = load_labeled_matrix(args.kinv_path) if args.kinv_path else None
    fixed = load_labeled_matrix(args.fixed_design_path) if args.fixed_design_path else None
    target = load_labeled_matrix(args.target_kernel_path).values if args.target_kernel_path else None
    contrast = _numeric_csv(args.contrast_path) if args.contrast_path else None
    spec = CriterionSpec(name=args.criterion, lambda_=lam, contrast=contrast,
                         kernel_inverse=kinv, fixed_design=fixed, target_kernel=target,
                         response=response, weight=args.weight)
    cands = read_id_list(args.candidates) if args.candidates else None
    test = read_id_list(args.test) if args.test else None
    plan = validate_partition(P, cands, test, args.ntoselect)
    return P, plan, spec


# -- output -------------------------------------------------------------------

def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _solutions_csv(ranked) -> str:
    return _csv_text(("rank", "value", "members"),
                     ((k + 1, repr(float(v)), ";".join(sol)) for k, (sol, v) in enumerate(ranked)))


def human_summary(ranked) -> str:
    return "\n".join(f"Solution with rank {k + 1}: value {v!r}; {', '.join(sol)}"
                     for k, (sol, v) in enumerate(ranked))


# -- commands -----------------------------------------------------------------

def cmd_select(args) -> int:
    cfg = run_config(args)
    P, plan, spec = load_problem(args, cfg.lambda_)
    if args.log_iters:
        logger = logging.getLogger("subsetopt.engine")
        logger.setLevel(logging.INFO)
        if not logger.handlers:
            logger.addHandler(logging.StreamHandler(sys.stderr))
    if args.islands > 1 or args.rounds > 1:
        res = run_islands(P, plan, spec, cfg, args.islands, args.rounds)
    else:
        res = run_lagat(P, plan, spec, cfg, log_iters=args.log_iters)
    if args.format == "json":
        _emit(res.to_json() + "\n", args.output)
    else:
        _emit(_solutions_csv(res.ranked_solutions), args.output)
    if args.trace_csv:
        Path(args.trace_csv).write_text(
            _csv_text(("iteration", "value"), ((i, repr(v)) for i, v in enumerate(res.trace))),
            encoding="utf-8")
    return 0


def cmd_enumerate(args) -> int:
    lam = args.lambda_ if args.lambda_ is not None else RunConfig().lambda_
    P, plan, spec = load_problem(args, lam)
    res = enumerate_best(P, plan, spec, tie_tolerance=args.tie_tolerance, cap=args.cap,
                         workers=args.workers)
    if args.format == "json":
        _emit(json.dumps(res.to_dict(), indent=2) + "\n", args.output)
    else:
        _emit(_csv_text(("value", "members"),
                        ((repr(res.min_value), ";".join(s)) for s in res.argmin_solutions)),
              args.output)
    return 0


def cmd_bench(args) -> int:
    cfg = run_config(args)
    if args.niterreg is None and cfg.niterreg == 0:
        cfg = cfg.replace(niterreg=5)
    P, plan, spec = load_problem(args, cfg.lambda_)
    res = run_bench(P, plan, spec, cfg, range(cfg.seed, cfg.seed + args.seeds), args.threshold)
    if args.format == "json":
        _emit(json.dumps(res.to_dict(), indent=2) + "\n", args.output)
    else:
        _emit(_csv_text(("variant", "seed", "iteration", "value"),
                        ((v, s, i, repr(x)) for v, s, i, x in res.rows())), args.output)
    return 0


def cmd_criteria(args) -> int:
    cat = catalog()
    if args.format == "json":
        sys.stdout.write(json.dumps(cat, indent=2) + "\n")
        return 0
    width = max(len(c["name"]) for c in cat)
    for c in cat:
        req = ",".join(c["requires"]) or "-"
        sys.stdout.write(f"{c['name']:<{width}}  {c['input_type']:<12}  {req:<16}  {c['formula']}\n")
    return 0


COMMANDS = {"select": cmd_select, "enumerate": cmd_enumerate, "bench": cmd_bench,
            "criteria": cmd_criteria}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"subsetopt: error: {_one_line(exc)}", file=sys.stderr)
        return 2
    except ComputationError as exc:
        print(f"subsetopt: computation failed: {_one_line(exc)}", file=sys.stderr)
        return 1
    except SubsetOptError as exc:
        print(f"subsetopt: error: {_one_line(exc)}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"subsetopt: error: {_one_line(exc)}", file=sys.stderr)
        return 2


def _one_line(exc) -> str:
    return " ".join(str(exc).split())


if __name__ == "__main__":
    sys.exit(main())
