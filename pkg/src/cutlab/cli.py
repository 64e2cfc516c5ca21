"""``cutlab`` command line."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from .cglp import load_cut
from .disjunction import load_disjunction
from .experiment import (EXACT_ENGINE_MAX_ROWS, NoFractionalVariables, RunConfig, format_table,
                         run_first_round, write_report)
from .instance import (NonzeroLowerBound, ParseError, SchemaError, UnsupportedFeature, read_model,
                       to_standard_form)
from .ratlin import as_fraction
from .rcv import Limits, is_cut_regular, oracle_witnesses
from .simplex import fractional_binaries, solve_relaxation

log = logging.getLogger("cutlab")

INPUT_ERRORS = (OSError, ParseError, SchemaError, UnsupportedFeature, NonzeroLowerBound,
                NoFractionalVariables, ValueError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _rational(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cutlab", description="Lift-and-project cut regularity toolkit.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    a = sub.add_parser("analyze", help="first-round cuts and regularity statistics")
    a.add_argument("--input", required=True, help=".mps, .mps.gz or fixture .json")
    a.add_argument("--k", type=int, action="append", help="branching set size (repeatable)")
    a.add_argument("--epsilon", type=_rational, default=Fraction(1, 10000))
    a.add_argument("--loop-limit", type=int)
    a.add_argument("--time-limit", type=float, help="seconds per cut")
    a.add_argument("--mip-optimum", type=_rational)
    a.add_argument("--subset-cap", type=int)
    a.add_argument("--engine", choices=("auto", "exact", "highs"), default="auto")
    a.add_argument("--jobs", type=int, default=1)
    a.add_argument("--out", help="report path")
    a.add_argument("--format", choices=("csv", "json"),
                   help="report format (default from the --out suffix, else csv)")

    v = sub.add_parser("verify-cut", help="run the regularity check on one cut")
    v.add_argument("--instance", required=True)
    v.add_argument("--cut", required=True, help="cut JSON")
    v.add_argument("--disjunction", required=True, help="disjunction JSON")
    v.add_argument("--epsilon", type=_rational, default=Fraction(1, 10000))
    v.add_argument("--loop-limit", type=int)
    v.add_argument("--time-limit", type=float)
    v.add_argument("--engine", choices=("auto", "exact", "highs"), default="auto")

    s = sub.add_parser("show-lp", help="solve and print the LP relaxation")
    s.add_argument("--input", required=True)

    o = sub.add_parser("oracle", help="brute-force extended regularity check")
    o.add_argument("--instance", required=True)
    o.add_argument("--cut", required=True)
    o.add_argument("--disjunction", required=True)
    o.add_argument("--epsilon", type=_rational, default=Fraction(0))
    return p


def _analyze(args) -> int:
    model = read_model(args.input)
    cfg = RunConfig(
        k_sizes=tuple(args.k or (2,)), epsilon=args.epsilon, loop_limit=args.loop_limit,
        time_limit_per_cut=args.time_limit, mip_optimum=args.mip_optimum,
        subset_cap=args.subset_cap, engine=args.engine, jobs=args.jobs,
    )
    rows = run_first_round(model, cfg)
    print(format_table(rows))
    if args.out:
        fmt = args.format or ("json" if args.out.endswith(".json") else "csv")
        write_report(rows, fmt, args.out)
    return 0


def _load_triple(args):
    model = read_model(args.instance)
    sf = to_standard_form(model, "auto")
    sol = load_cut(Path(args.cut).read_text())
    d = load_disjunction(Path(args.disjunction).read_text())
    if len(sol.alpha) != sf.n or d.n != sf.n:
        raise ValueError("cut, disjunction and instance disagree on the number of variables")
    if sol.u and (len(sol.u) != len(d.terms) or any(len(ut) != sf.q for ut in sol.u)):
        raise ValueError("cut multipliers do not match the instance and disjunction")
    return sf, sol, d


def _verify(args) -> int:
    sf, sol, d = _load_triple(args)
    engine = args.engine
    if engine == "auto":
        engine = "exact" if sf.q <= EXACT_ENGINE_MAX_ROWS else "highs"
    verdict = is_cut_regular(sol.cut, sol if sol.u else None, sf, d, args.epsilon,
                             Limits(args.loop_limit, args.time_limit), engine=engine,
                             cut_id=Path(args.cut).stem)
    print(json.dumps(verdict.to_dict()))
    return 0


def _show_lp(args) -> int:
    model = read_model(args.input)
    sf = to_standard_form(model, "auto")
    sol = solve_relaxation(sf, model.objective.c, model.objective.sense)
    out = {"name": model.name, "n": sf.n, "q": sf.q, "status": sol.status}
    if sol.x is not None:
        out["objective"] = str(sol.objective)
        out["x"] = [str(a) for a in sol.x]
        out["fractional_binaries"] = fractional_binaries(sol, model)
    print(json.dumps(out))
    return 0


def _oracle(args) -> int:
    sf, sol, d = _load_triple(args)
    wit = oracle_witnesses(sol.cut, sf, d, args.epsilon)
    print(json.dumps({"extended_regular": bool(wit), "witnesses": [list(N) for N in wit]}))
    return 0


COMMANDS = {"analyze": _analyze, "verify-cut": _verify, "show-lp": _show_lp, "oracle": _oracle}


def main(argv=None) -> int:
    level = os.environ.get("CUTLAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except INPUT_ERRORS as exc:
        print(f"cutlab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
