"""Command-line interface: solve, sweep, verify, gen-grid.

Exit codes: 0 success (and, for solve/verify, a certified equilibrium);
1 input or document errors; 2 solver nonconvergence or failed certification.
"""

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import lp
from .analysis import EvaluationError, verify_equilibrium
from .defaults import build_table
from .documents import DocumentError, dumps_solution, parse_solution, round_sig, solution_document
from .double_oracle import NonconvergenceError, SolveError, SolveOptions, solve_game
from .environment import (ScenarioError, UnreachableError, generate_grid,
                          load_scenario, save_scenario, scenario_from_dict,
                          scenario_to_dict)
from .metrics import compute_metrics
from .sequence_lp import DefenderStrategy, build_dual, build_primal

SWEEP_COLUMNS = ["start", "value", "voi", "rod", "support", "iters", "ms"]


def _options_from_args(args) -> SolveOptions:
    delta = None
    if getattr(args, "delta", None) is not None:
        delta = 0.0 if args.delta == "auto" else float(args.delta)
    return SolveOptions(
        tau0=args.tau0,
        feas_tol=args.tol,
        opt_tol=args.tol,
        zero_tol=args.tol,
        max_iter=args.max_iter,
        delta=delta,
        backend=args.backend,
        verbose=args.verbose,
    )


def _read_scenario(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return load_scenario(fh.read())
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path!r}: {exc}") from exc


def _solve_and_report(scenario, opts: SolveOptions, cert_tol: float):
    sol = solve_game(scenario, opts)
    keys = set(sol.restricted.keys())
    report = verify_equilibrium(
        scenario, sol.defender, sol.attacker, sol.table, keys,
        tol=cert_tol, zero_tol=opts.zero_tol, duality_gap=sol.duality_gap)
    metrics = compute_metrics(
        scenario, sol.attacker, keys, sol.per_type_costs, sol.value, opts.zero_tol)
    return sol, report, metrics


def cmd_solve(args) -> int:
    try:
        scenario = _read_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 1
    opts = _options_from_args(args)
    try:
        sol, report, metrics = _solve_and_report(scenario, opts, args.cert_tol)
    except NonconvergenceError as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return 2
    except (SolveError, lp.LpError, EvaluationError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    if args.dump_lp:
        pm, _ = build_primal(sol.restricted)
        dm, _ = build_dual(sol.restricted)
        with open(args.dump_lp + ".primal.lp", "w", encoding="utf-8") as fh:
            lp.dump_lp(pm, fh)
        with open(args.dump_lp + ".dual.lp", "w", encoding="utf-8") as fh:
            lp.dump_lp(dm, fh)
    text = dumps_solution(solution_document(sol, report, metrics, opts.zero_tol))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not report.certified:
        print(f"certification failed: attacker_gap={report.attacker_gap:.3e} "
              f"defender_gap={report.defender_gap:.3e}", file=sys.stderr)
        return 2
    return 0


def _sweep_cell(payload):
    scenario_doc, start, opts_dict, cert_tol = payload
    t0 = time.perf_counter()

    def ms():
        return round(1000.0 * (time.perf_counter() - t0))

    try:
        scenario = scenario_from_dict(scenario_doc).replace_start(start)
        sol, report, metrics = _solve_and_report(
            scenario, SolveOptions(**opts_dict), cert_tol)
    except (ScenarioError, UnreachableError, NonconvergenceError, SolveError,
            lp.LpError, EvaluationError) as exc:
        return [start, "", "", "", f"error:{type(exc).__name__}", "", ms()]
    if not report.certified:
        return [start, "", "", "", "error:not-certified", "", ms()]
    return [
        start,
        f"{round_sig(sol.value):.12g}",
        f"{round_sig(metrics.voi_overall):.12g}",
        f"{round_sig(metrics.rod_overall):.12g}",
        "|".join(metrics.support),
        sol.iterations,
        ms(),
    ]


def cmd_sweep(args) -> int:
    try:
        scenario = _read_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 1
    if args.starts == "all":
        starts = list(scenario.nodes)
    else:
        starts = [x.strip() for x in args.starts.split(",") if x.strip()]
        unknown = [x for x in starts if x not in scenario.nodes]
        if unknown:
            print(f"unknown start nodes: {unknown}", file=sys.stderr)
            return 1
    opts = _options_from_args(args)
    opts_dict = opts.__dict__.copy()
    payloads = [(scenario_to_dict(scenario), st, opts_dict, args.cert_tol)
                for st in starts]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_cell, payloads))
    else:
        rows = [_sweep_cell(p) for p in payloads]
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(SWEEP_COLUMNS)
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    return 0


def cmd_verify(args) -> int:
    try:
        scenario = _read_scenario(args.scenario)
        with open(args.solution, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        value, attacker, allocation, keys = parse_solution(doc, scenario)
    except (ScenarioError, DocumentError, OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    table = build_table(scenario)
    defender = DefenderStrategy(allocation, dict(table.defender_goal))
    try:
        report = verify_equilibrium(scenario, defender, attacker, table,
                                    set(keys), tol=args.cert_tol)
    except EvaluationError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return 2
    print(f"expected value     {report.expected_value:.12g} "
          f"(document: {value:.12g})")
    print(f"attacker gap       {report.attacker_gap:.6e}")
    print(f"defender gap       {report.defender_gap:.6e}")
    print(f"type spread        {report.indifference.type_spread:.6e}")
    for msg in report.indifference.violations:
        print(f"indifference       {msg}")
    print(f"certified          {report.certified}")
    return 0 if report.certified else 2


def _parse_cell(text: str) -> tuple[int, int]:
    try:
        r, c = text.split(",")
        return int(r), int(c)
    except ValueError as exc:
        raise ScenarioError(f"bad cell spec {text!r}; expected ROW,COL") from exc


def cmd_gen_grid(args) -> int:
    try:
        goals = [_parse_cell(g) for g in args.goal]
        start = _parse_cell(args.start)
        scenario = generate_grid(args.rows, args.cols, goals, start, args.weight)
    except ScenarioError as exc:
        print(f"grid error: {exc}", file=sys.stderr)
        return 1
    text = save_scenario(scenario) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau0", type=int, default=None,
                   help="initial horizon (default: hop count of the nearest goal)")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="LP feasibility/optimality/support tolerance")
    p.add_argument("--max-iter", type=int, default=None,
                   help="expansion round cap (default: 10 * number of nodes)")
    p.add_argument("--delta", nargs="?", const="auto", default=None,
                   help="use perturbed continuation values; optional value "
                        "(default 1e-6 * min edge weight)")
    p.add_argument("--backend", choices=["auto", "builtin", "highs"], default="auto",
                   help="LP backend (auto picks by model size)")
    p.add_argument("--cert-tol", type=float, default=1e-6,
                   help="best-response gap tolerance for certification")
    p.add_argument("--verbose", action="store_true",
                   help="trace expansion rounds on stderr")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dppsolve",
        description="Equilibrium solver for multi-goal deceptive path planning games.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one scenario and write its solution JSON")
    p.add_argument("scenario")
    p.add_argument("--out", default=None, help="solution path (default stdout)")
    p.add_argument("--dump-lp", default=None, metavar="PREFIX",
                   help="dump final primal/dual models in LP text format")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="solve per start node and write a CSV")
    p.add_argument("scenario")
    p.add_argument("--starts", default="all",
                   help='"all" or comma-separated node ids')
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.add_argument("--jobs", type=int, default=1, help="parallel solves")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="re-check a solution document independently")
    p.add_argument("scenario")
    p.add_argument("solution")
    p.add_argument("--cert-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen-grid", help="write a 4-connected grid scenario")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--goal", action="append", required=True, metavar="R,C")
    p.add_argument("--start", required=True, metavar="R,C")
    p.add_argument("--weight", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_grid)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
