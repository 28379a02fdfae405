"""Command-line front end: generate instances, solve them, compare solutions.

Exit codes: 0 on success, 1 on solver/runtime failure, 2 on usage errors.
Seeded runs are byte-reproducible: reports and solution files contain no
volatile data (timings go to stderr).
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import harness
from .generators import (gen_classroom, gen_crossing, gen_random_walk,
                         gen_setcover_gadget)
from .lp import write_lp_text
from .model import (DynflError, Mode, read_instance, read_solution,
                    write_instance, write_solution)
from .relaxation import build_lp_fixed, build_lp_hourly

_EPILOG = """\
environment:
  DYNFL_SIZE_GUARD   raise exact-solver limits, e.g.
                     "fixed_m_max=22,hourly_state_max=2e6,hourly_t_max=10"
"""


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynfl",
        description="Dynamic facility location: generators, solvers, reports.",
        epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write an instance file")
    kinds = gen.add_subparsers(dest="kind", required=True)

    def common_costs(p, g_too=True):
        p.add_argument("--opening-cost", "-f", type=float, default=1.0,
                       help="facility opening cost f (default 1)")
        if g_too:
            p.add_argument("--switching-cost", "-g", type=float, default=1.0,
                           help="client switching cost g (default 1)")
        p.add_argument("--output", "-o", required=True, help="instance file to write")

    p = kinds.add_parser("classroom", help="groups plus one roving client")
    p.add_argument("--groups", type=int, required=True)
    p.add_argument("--size", type=int, required=True, help="clients per group")
    p.add_argument("--horizon", type=int, required=True, help="number of time steps")
    p.add_argument("--intra", type=float, default=0.0, help="in-group distance (default 0)")
    p.add_argument("--inter", type=float, default=1e3, help="cross-group distance (default 1000)")
    common_costs(p)

    p = kinds.add_parser("crossing", help="two groups crossing on a line")
    p.add_argument("--size", type=int, required=True, help="clients per group")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--step", type=float, default=10.0, help="per-step displacement (default 10)")
    common_costs(p)

    p = kinds.add_parser("setcover", help="covering gadget (single client)")
    p.add_argument("--universe", type=int, required=True, help="number of elements = time steps")
    p.add_argument("--sets", required=True,
                   help="semicolon-separated sets of comma-separated 1-based elements, "
                        "e.g. '1,2;2,3;3'")
    common_costs(p, g_too=False)

    p = kinds.add_parser("random-walk", help="reflected random walks in the unit square")
    p.add_argument("--clients", type=int, required=True)
    p.add_argument("--facilities", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--step", type=float, default=0.1, help="walk step size (default 0.1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["fixed", "hourly"], default="fixed")
    common_costs(p)

    p = sub.add_parser("solve", help="solve an instance and report trial statistics")
    p.add_argument("instance", help="instance file")
    p.add_argument("--algorithm", choices=["lp-round", "exact", "static"],
                   default="lp-round")
    p.add_argument("--trials", type=int, default=harness.DEFAULT_TRIALS,
                   help=f"rounding trials, best kept (default {harness.DEFAULT_TRIALS})")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--output", "-o", help="write the best solution here")
    p.add_argument("--format", choices=["json", "table"], default="table")
    p.add_argument("--with-exact", choices=["auto", "on", "off"], default="auto",
                   help="include the exact optimum in the report (default auto)")
    p.add_argument("--with-static", choices=["auto", "on", "off"], default="auto",
                   help="include the static-baseline cost (default auto)")
    p.add_argument("--with-lp", choices=["auto", "on", "off"], default="auto",
                   help="solve the LP relaxation (default auto: only desk-sized LPs)")
    p.add_argument("--retry-budget", type=int, default=64,
                   help="threshold redraws per hourly rounding trial (default 64)")
    p.add_argument("--dump-lp", metavar="PATH",
                   help="also write the relaxation in LP interchange format")

    p = sub.add_parser("report", help="compare solution files on one instance")
    p.add_argument("instance", help="instance file")
    p.add_argument("solutions", nargs="+", help="solution files to compare")
    p.add_argument("--format", choices=["json", "table"], default="table")
    p.add_argument("--with-exact", choices=["auto", "on", "off"], default="auto")
    p.add_argument("--with-lp", choices=["auto", "on", "off"], default="auto")
    return parser


def _cmd_generate(args) -> int:
    if args.kind == "classroom":
        inst = gen_classroom(groups=args.groups, group_size=args.size,
                             horizon=args.horizon, intra=args.intra, inter=args.inter,
                             f=args.opening_cost, g=args.switching_cost)
    elif args.kind == "crossing":
        inst = gen_crossing(group_size=args.size, horizon=args.horizon,
                            step=args.step, f=args.opening_cost,
                            g=args.switching_cost)
    elif args.kind == "setcover":
        sets = [[int(e) for e in chunk.split(",") if e.strip()]
                for chunk in args.sets.split(";") if chunk.strip()]
        inst = gen_setcover_gadget(universe=args.universe, sets=sets,
                                   f=args.opening_cost)
    else:
        inst = gen_random_walk(n=args.clients, m=args.facilities, T=args.horizon,
                               step=args.step, f=args.opening_cost,
                               g=args.switching_cost, seed=args.seed,
                               mode=Mode(args.mode))
    write_instance(inst, args.output)
    print(f"wrote {args.output} (n={inst.n}, m={inst.m}, T={inst.T}, "
          f"mode={inst.mode.value})", file=sys.stderr)
    return 0


def _cmd_solve(args) -> int:
    instance = read_instance(args.instance)
    if args.dump_lp:
        builder = build_lp_fixed if instance.mode is Mode.FIXED else build_lp_hourly
        lp, index = builder(instance)
        write_lp_text(lp, args.dump_lp, index.names())
    started = time.perf_counter()
    solution, report = harness.solve_instance(
        instance, args.algorithm, trials=args.trials, seed=args.seed,
        with_exact=args.with_exact, with_static=args.with_static,
        with_lp=args.with_lp, retry_budget=args.retry_budget,
        instance_name=os.path.basename(args.instance))
    report.wall_clock_s = time.perf_counter() - started
    if args.output:
        write_solution(solution, args.output)
    sys.stdout.write(report.to_json() if args.format == "json" else report.to_table())
    print(f"solved in {report.wall_clock_s:.3f}s", file=sys.stderr)
    return 0


def _cmd_report(args) -> int:
    instance = read_instance(args.instance)
    named = [(os.path.basename(path), read_solution(path)) for path in args.solutions]
    report = harness.build_comparison(instance, named, with_exact=args.with_exact,
                                      with_lp=args.with_lp,
                                      instance_name=os.path.basename(args.instance))
    sys.stdout.write(report.to_json() if args.format == "json" else report.to_table())
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_report(args)
    except (DynflError, ValueError, OSError) as exc:
        print(f"dynfl: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
