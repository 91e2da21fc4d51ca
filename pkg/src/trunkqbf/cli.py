"""Command-line entry point.

Verdict commands follow the SAT-solver convention: ``s cnf 1`` and exit
code 10 when the instance is true, ``s cnf 0`` and exit code 20 when it
is false.  Parse, validation and resource errors exit 1 with the
diagnostic on standard error.  Standard output carries only the verdict
line plus, behind ``--stats``, ``c``-prefixed statistics lines.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from .decomposition import (
    DecompositionError,
    validate_nice,
    validate_trunk_aligned,
    width,
)
from .derivation import (
    DerivationError,
    EngineLimits,
    run_derivation,
)
from .formats import (
    ParseError,
    parse_btd,
    parse_poset,
    parse_qdimacs,
    write_btd,
    write_qdimacs,
    write_trace,
)
from .formulas import QbfInstance
from .generators import qparity, qparity_td
from .oracle import BudgetExceededError, OracleBudget, evaluate
from .posets import trivial_poset

EXIT_TRUE = 10
EXIT_FALSE = 20
EXIT_ERROR = 1


def _fail(message: str) -> int:
    print(message, file=sys.stderr)
    return EXIT_ERROR


def _load_instance(path: str) -> QbfInstance:
    return parse_qdimacs(Path(path).read_text(encoding="utf-8"))


def _load_poset(args, instance: QbfInstance):
    if args.trivial_poset:
        return trivial_poset(instance.prefix)
    text = Path(args.poset).read_text(encoding="utf-8")
    return parse_poset(text, instance.prefix)


def cmd_solve(args) -> int:
    try:
        instance = _load_instance(args.instance)
        td = parse_btd(Path(args.td).read_text(encoding="utf-8"))
        poset = _load_poset(args, instance)
        limits = EngineLimits(
            max_family_size=args.max_family_size,
            max_set_size=args.max_set_size,
            max_strategies=args.max_strategies,
        )
        result = run_derivation(instance, td, poset, limits, checks=args.checks)
    except (OSError, ParseError, DecompositionError, DerivationError, ValueError) as exc:
        return _fail(f"error: {exc}")
    if args.trace:
        try:
            write_trace(result.trace, args.trace)
        except OSError as exc:
            return _fail(f"error: cannot write trace: {exc}")
    if args.stats:
        peak_family = max((e.family_after for e in result.trace), default=1)
        peak_set = max((e.max_set_size for e in result.trace), default=1)
        total = sum(e.micros for e in result.trace)
        print(f"c steps {len(result.trace)}")
        print(f"c peak_family_size {peak_family}")
        print(f"c peak_set_size {peak_set}")
        print(f"c engine_micros {total}")
    print(f"s cnf {1 if result.verdict else 0}")
    return EXIT_TRUE if result.verdict else EXIT_FALSE


def cmd_validate(args) -> int:
    try:
        instance = _load_instance(args.instance)
        td = parse_btd(Path(args.td).read_text(encoding="utf-8"))
        poset = _load_poset(args, instance)
    except (OSError, ParseError, DecompositionError, ValueError) as exc:
        return _fail(f"error: {exc}")
    nice = validate_nice(td, instance)
    if not nice.ok:
        return _fail(f"invalid decomposition: {nice.summary()}")
    aligned = validate_trunk_aligned(td, instance, poset)
    if not aligned.ok:
        return _fail(f"decomposition not trunk-aligned: {aligned.summary()}")
    if args.stats:
        print(f"c width {width(td)}")
        print(f"c nodes {len(td.nodes)}")
    return 0


def cmd_oracle(args) -> int:
    try:
        instance = _load_instance(args.instance)
        verdict = evaluate(instance, OracleBudget(max_variables=args.budget))
    except (OSError, ParseError, BudgetExceededError, ValueError) as exc:
        return _fail(f"error: {exc}")
    print(f"s cnf {1 if verdict else 0}")
    return EXIT_TRUE if verdict else EXIT_FALSE


def cmd_gen(args) -> int:
    if args.family != "qparity":
        return _fail(f"error: unknown family {args.family!r}")
    try:
        instance = qparity(args.n)
        td = qparity_td(args.n)
    except ValueError as exc:
        return _fail(f"error: {exc}")
    try:
        Path(f"{args.out_prefix}.qdimacs").write_text(
            write_qdimacs(instance), encoding="utf-8"
        )
        Path(f"{args.out_prefix}.btd").write_text(write_btd(td), encoding="utf-8")
    except OSError as exc:
        return _fail(f"error: {exc}")
    return 0


def _add_poset_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument(
        "--trivial-poset",
        action="store_true",
        help="use the full prefix-order dependency poset",
    )
    group.add_argument("--poset", metavar="FILE", help="load a poset file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trunkqbf",
        description="QBF evaluation on trunk-aligned tree decompositions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="decide an instance with the derivation engine")
    solve.add_argument("instance", help="QDIMACS file")
    solve.add_argument("--td", required=True, metavar="FILE", help="BTD decomposition file")
    _add_poset_flags(solve)
    solve.add_argument("--trace", metavar="FILE", help="write a JSON-lines trace")
    solve.add_argument(
        "--checks",
        action="store_true",
        help="assert per-step engine invariants (slower)",
    )
    solve.add_argument("--stats", action="store_true", help="print statistics lines")
    solve.add_argument("--max-family-size", type=int, default=EngineLimits().max_family_size)
    solve.add_argument("--max-set-size", type=int, default=EngineLimits().max_set_size)
    solve.add_argument("--max-strategies", type=int, default=EngineLimits().max_strategies)
    solve.set_defaults(func=cmd_solve)

    validate = sub.add_parser("validate", help="validate a decomposition for an instance")
    validate.add_argument("instance", help="QDIMACS file")
    validate.add_argument("--td", required=True, metavar="FILE", help="BTD file")
    _add_poset_flags(validate)
    validate.add_argument("--stats", action="store_true", help="print statistics lines")
    validate.set_defaults(func=cmd_validate)

    oracle = sub.add_parser("oracle", help="decide an instance by brute force")
    oracle.add_argument("instance", help="QDIMACS file")
    oracle.add_argument(
        "--budget",
        type=int,
        default=OracleBudget().max_variables,
        help="maximum number of variables",
    )
    oracle.set_defaults(func=cmd_oracle)

    gen = sub.add_parser("gen", help="write a generated instance and decomposition")
    gen.add_argument("family", help="instance family (qparity)")
    gen.add_argument("n", type=int, help="family index")
    gen.add_argument("out_prefix", help="output path prefix")
    gen.set_defaults(func=cmd_gen)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def console_main() -> None:
    sys.exit(main())
