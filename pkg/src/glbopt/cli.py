"""Command-line front end: gen, solve, sweep, export-lp.

Exit codes for ``solve``: 0 for an eps-solution, 2 when the solution violates
the lower bound (infeasible problem), 1 for any error.  All other commands
use 0/1.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bench
from .instances import (
    InstanceFormatError,
    gen_graph,
    load_instance,
    random_linear_problem,
    save_instance,
    speed_plan_spec_from_csv,
    SpeedPlanSpec,
    hjb_grid_problem,
    speed_planning_problem,
)
from .lattice import NonConvergenceError, StartPointError
from .linear import ProblemDataError, write_lp
from .queues import POLICIES


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); 2 means infeasible here
        raise CliError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="glbopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[], help="generate an instance file")
    gen.add_argument("--family", required=True, choices=("ba", "nws", "hk", "speedplan", "hjb"))
    gen.add_argument("--n", type=int, required=True, help="variables / samples / grid points")
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--out", required=True)
    gen.add_argument("--pieces", type=int, default=4, help="number of affine pieces (graph families)")
    gen.add_argument("--max-coeff", type=float, default=0.5)
    gen.add_argument("--max-offset", type=float, default=1.0)
    gen.add_argument("--cap", type=float, default=1e5)
    gen.add_argument("--graph-m", type=int, default=None, help="attachment count (ba/hk)")
    gen.add_argument("--graph-k", type=int, default=None, help="ring degree (nws)")
    gen.add_argument("--graph-p", type=float, default=None, help="shortcut/triangle probability")
    gen.add_argument("--curvature-csv", default=None, help="speedplan: two-column (s, k) CSV")
    gen.add_argument("--path-length", type=float, default=None, help="speedplan: s_f for flat curvature")
    gen.add_argument("--v-max", type=float, default=5.0)
    gen.add_argument("--acc-t", type=float, default=1.0)
    gen.add_argument("--acc-n", type=float, default=1.0)
    gen.add_argument("--preset", default="const1d", help="hjb: const1d, drift1d or spin2d")
    gen.add_argument("--discount", type=float, default=1.0, help="hjb: rate lambda")
    gen.add_argument("--step", type=float, default=0.5, help="hjb: integration step h")

    solve = sub.add_parser("solve", help="solve an instance file")
    solve.add_argument("instance")
    solve.add_argument("--method", default="selective-precond", choices=bench.METHODS)
    solve.add_argument("--policy", default="fifo", choices=POLICIES)
    solve.add_argument("--eps", type=float, default=1e-9)
    solve.add_argument("--max-iter", type=int, default=100_000)
    solve.add_argument("--out", default=None, help="write the solution report as JSON")

    sweep = sub.add_parser("sweep", help="run a benchmark sweep, write CSV")
    sweep.add_argument("--family", default="ba", choices=bench.FAMILIES)
    sweep.add_argument("--instance", default=None, help="instance file (family 'file')")
    sweep.add_argument("--sizes", default="500", help="comma-separated instance sizes")
    sweep.add_argument("--tolerances", default="1e-6", help="comma-separated eps values")
    sweep.add_argument("--pieces", type=int, default=4)
    sweep.add_argument("--max-coeff", type=float, default=0.5)
    sweep.add_argument("--max-offset", type=float, default=1.0)
    sweep.add_argument("--cap", type=float, default=1e5)
    sweep.add_argument("--policies", default=",".join(POLICIES))
    sweep.add_argument("--methods", default=",".join(bench.METHODS))
    sweep.add_argument("--reps", type=int, default=5)
    sweep.add_argument("--seed", type=int, default=1)
    sweep.add_argument("--time-budget", type=float, default=None, help="seconds per run")
    sweep.add_argument("--max-iter", type=int, default=100_000)
    sweep.add_argument("--out", required=True)

    export = sub.add_parser("export-lp", help="write the CPLEX-LP reformulation")
    export.add_argument("instance")
    export.add_argument("--out", required=True)
    return parser


def _cmd_gen(args) -> int:
    if args.family in ("ba", "nws", "hk"):
        params = {}
        if args.graph_m is not None:
            params["m"] = args.graph_m
        if args.graph_k is not None:
            params["k"] = args.graph_k
        if args.graph_p is not None:
            params["p"] = args.graph_p
        graphs = [
            gen_graph(args.family, args.n, seed=(args.seed, ell), **params)
            for ell in range(args.pieces)
        ]
        problem = random_linear_problem(
            graphs, max_coeff=args.max_coeff, max_offset=args.max_offset,
            cap=args.cap, seed=args.seed,
        )
    elif args.family == "speedplan":
        if args.curvature_csv:
            spec = speed_plan_spec_from_csv(
                args.curvature_csv, args.n, args.v_max, args.acc_t, args.acc_n
            )
        else:
            spec = SpeedPlanSpec(
                path_length=args.path_length if args.path_length is not None else float(args.n - 1),
                samples=args.n,
                curvature=np.zeros(args.n),
                v_max=args.v_max,
                acc_tangential=args.acc_t,
                acc_normal=args.acc_n,
            )
        problem = speed_planning_problem(spec)
    else:  # hjb
        problem = hjb_grid_problem(
            bench.hjb_preset(args.preset, args.n, args.discount, args.step)
        )
    save_instance(problem, args.out)
    print(f"wrote {args.out}: n={problem.n}, L={problem.L}, nnz={problem.total_nnz}")
    return 0


def _cmd_solve(args) -> int:
    problem = load_instance(args.instance)
    report = bench.solve_with_method(
        problem, args.method, policy=args.policy, eps=args.eps, max_iter=args.max_iter
    )
    summary = {
        "method": args.method,
        "policy": report.policy,
        "eps": report.epsilon,
        "residual": report.residual_inf,
        "feasible": report.feasible,
        "scalar_multiplications": report.scalar_multiplications,
        "component_updates": report.component_updates,
        "dequeues": report.dequeues,
        "wall_time": report.wall_time,
        "error_bound": report.error_bound,
    }
    for key, value in summary.items():
        print(f"{key}: {value}")
    if args.out:
        summary["x"] = report.x.tolist()
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=1)
            fh.write("\n")
    if not report.feasible:
        return 2
    return 0 if report.residual_inf <= args.eps else 1


def _parse_list(text: str, convert):
    return tuple(convert(tok) for tok in text.split(",") if tok.strip())


def _cmd_sweep(args) -> int:
    config = bench.SweepConfig(
        family=args.family,
        sizes=_parse_list(args.sizes, int),
        tolerances=_parse_list(args.tolerances, float),
        pieces=args.pieces,
        max_coeff=args.max_coeff,
        max_offset=args.max_offset,
        cap=args.cap,
        policies=_parse_list(args.policies, str),
        methods=_parse_list(args.methods, str),
        repetitions=args.reps,
        seed_base=args.seed,
        time_budget=args.time_budget,
        instance_path=args.instance,
        max_iter=args.max_iter,
    )
    rows = bench.run_sweep(config)
    bench.write_sweep_csv(rows, args.out)
    print(f"wrote {args.out}: {len(rows)} rows")
    return 0


def _cmd_export_lp(args) -> int:
    problem = load_instance(args.instance)
    write_lp(problem, args.out)
    print(f"wrote {args.out}: {problem.L * problem.n + problem.n} constraint rows")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "export-lp":
            return _cmd_export_lp(args)
        raise CliError(f"unknown command {args.command!r}")
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, InstanceFormatError, ProblemDataError, ValueError,
            StartPointError, NonConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
