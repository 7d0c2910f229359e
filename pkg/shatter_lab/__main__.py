"""CLI entry point for the shattering-threshold toolkit."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from loguru import logger
from pydantic import ValidationError

from . import oracles, theory
from .arrayfile import read_array, write_array
from .config import DEFAULT_A_CONST, DEFAULT_LOG_LEVEL, DEFAULT_WITNESS_CAP
from .core import ArrayKind, ParameterError
from .experiments import (
    ThresholdNotFoundError,
    empirical_threshold,
    mc_second_moment,
    threshold_scan,
)
from .models import ScanConfig
from .randgen import SeedSpec, gen_perm_array, gen_perm_array_order_stats, gen_word_array
from .shatter import count_unshattered, vc_dimension

KINDS = [kind.value for kind in ArrayKind]


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--log-level",
        default=DEFAULT_LOG_LEVEL,
        help=f"Stderr log level (default: {DEFAULT_LOG_LEVEL}).",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m shatter_lab",
        description="Random covering arrays and permutation families: generate, check, measure.",
    )
    _add_common(parser)
    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser("gen", help="Write a random array file.")
    gen.add_argument("--kind", choices=KINDS, required=True)
    gen.add_argument("--n", type=int, required=True, help="Number of columns.")
    gen.add_argument("--k", type=int, required=True, help="Number of rows.")
    gen.add_argument("--q", type=int, help="Alphabet size (words only).")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument(
        "--generator",
        choices=["shuffle", "order-stats"],
        default="shuffle",
        help="Permutation sampler (default: shuffle).",
    )
    gen.add_argument("--out", type=Path, required=True)

    check = subparsers.add_parser("check", help="Report unshattered column t-tuples as JSON.")
    check.add_argument("--in", dest="path", type=Path, required=True)
    check.add_argument("--t", type=int, required=True)
    check.add_argument(
        "--witnesses",
        type=int,
        default=DEFAULT_WITNESS_CAP,
        help=f"Maximum witnesses listed (default: {DEFAULT_WITNESS_CAP}).",
    )

    vc = subparsers.add_parser("vc", help="Print the size of the smallest unshattered set.")
    vc.add_argument("--in", dest="path", type=Path, required=True)
    vc.add_argument("--t-max", type=int, required=True)
    vc.add_argument("--samples", type=int, default=0, help="Random tuples tried per size first.")
    vc.add_argument("--seed", type=int, default=0)

    theory_parser = subparsers.add_parser("theory", help="Evaluate closed-form thresholds.")
    theory_sub = theory_parser.add_subparsers(dest="table", required=True)
    thresholds = theory_sub.add_parser("thresholds", help="Row thresholds for one configuration.")
    thresholds.add_argument("--kind", choices=KINDS, required=True)
    thresholds.add_argument("--n", type=int, required=True)
    thresholds.add_argument("--t", type=int, default=3)
    thresholds.add_argument("--q", type=int)
    thresholds.add_argument("--A", dest="a_const", type=float, default=DEFAULT_A_CONST)
    thresholds.add_argument("--omega", type=float)
    constants = theory_sub.add_parser("constants", help="Per-lg n constants and overlap checks.")
    constants.add_argument("--kind", choices=KINDS, default=ArrayKind.WORDS.value)
    constants.add_argument("--q", type=int, default=2)
    constants.add_argument("--t", type=int, default=3)

    scan = subparsers.add_parser("scan", help="Monte Carlo covering probability over k.")
    scan.add_argument("--kind", choices=KINDS, required=True)
    scan.add_argument("--n", type=int, required=True)
    scan.add_argument("--t", type=int, required=True)
    scan.add_argument("--q", type=int)
    scan.add_argument("--k-min", type=int, required=True)
    scan.add_argument("--k-max", type=int, required=True)
    scan.add_argument("--k-step", type=int, default=1)
    scan.add_argument("--trials", type=int, required=True)
    scan.add_argument("--seed", type=int, required=True)
    scan.add_argument("--threads", type=int, default=1, help="Worker processes; output unchanged.")
    scan.add_argument("--out", type=Path, required=True)
    scan.add_argument("--format", choices=["csv", "json"], default="csv")

    moments = subparsers.add_parser("moments", help="Sample mean and variance of X as JSON.")
    moments.add_argument("--kind", choices=KINDS, required=True)
    moments.add_argument("--n", type=int, required=True)
    moments.add_argument("--t", type=int, required=True)
    moments.add_argument("--q", type=int)
    moments.add_argument("--k", type=int, required=True)
    moments.add_argument("--trials", type=int, required=True)
    moments.add_argument("--seed", type=int, required=True)
    moments.add_argument("--threads", type=int, default=1)

    oracle = subparsers.add_parser("oracle", help="Exhaustive and Monte Carlo cross-checks.")
    oracle_sub = oracle.add_subparsers(dest="oracle", required=True)
    oracle_sub.add_parser("table1", help="Joint counts of two 3-patterns sharing one column.")
    oracle_sub.add_parser("overlap2", help="Joint probabilities for two shared columns.")
    exact = oracle_sub.add_parser("exact-expect", help="Exact single-tuple covering probability.")
    exact.add_argument("--k", type=int, required=True)
    exact.add_argument("--arity", type=int, required=True)
    exact.add_argument("--n", type=int, help="With --t, also print the exact E(X).")
    exact.add_argument("--t", type=int)
    pair = oracle_sub.add_parser("pair-corr", help="P(two overlapping tuples both unshattered).")
    pair.add_argument("--kind", choices=KINDS, default=ArrayKind.PERMS.value)
    pair.add_argument("--r", type=int, default=1, help="Number of shared columns.")
    pair.add_argument("--k", type=int, required=True)
    pair.add_argument("--trials", type=int, required=True)
    pair.add_argument("--seed", type=int, default=0)
    pair.add_argument("--q", type=int, default=2)
    pair.add_argument("--t", type=int, default=2, help="Tuple size (words only).")
    pair.add_argument("--threads", type=int, default=1)

    return parser


def _configure_logging(level: str) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level.upper())


def _row(name: str, value: object) -> str:
    if isinstance(value, float):
        value = f"{value:.4f}"
    return f"{name:<28}{value}"


def _cmd_gen(args: argparse.Namespace) -> int:
    seed = SeedSpec(args.seed)
    if args.kind == ArrayKind.WORDS.value:
        if args.q is None:
            raise ParameterError("--q is required for word arrays.")
        arr = gen_word_array(args.n, args.k, args.q, seed)
    elif args.generator == "order-stats":
        arr = gen_perm_array_order_stats(args.n, args.k, seed)
    else:
        arr = gen_perm_array(args.n, args.k, seed)
    write_array(args.out, arr)
    logger.info(f"Wrote {arr.kind.value} array k={arr.k} n={arr.n} to {args.out}")
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    report = count_unshattered(read_array(args.path), args.t, witness_cap=args.witnesses)
    print(report.model_dump_json(by_alias=True))
    return 0 if report.covering else 1


def _cmd_vc(args: argparse.Namespace) -> int:
    result = vc_dimension(
        read_array(args.path), t_max=args.t_max, samples=args.samples, seed=SeedSpec(args.seed)
    )
    print(result)
    return 0


def _cmd_thresholds(args: argparse.Namespace) -> int:
    spec = theory.threshold_spec(
        args.kind, args.n, args.t, args.q, a_const=args.a_const, omega=args.omega
    )
    print(_row("k_upper", spec.k_upper))
    if spec.k_lower is not None:
        print(_row("k_lower", spec.k_lower))
    if spec.kind is ArrayKind.WORDS:
        refined = theory.threshold_upper_words_refined(args.n, args.q, args.t, args.omega or 0.0)
        print(_row("k_upper_refined", refined))
        print(_row("A", spec.a_const))
    elif spec.omega is not None:
        print(_row("omega", spec.omega))
    return 0


def _verdict(ok: bool) -> str:
    return "pass" if ok else "FAIL"


def _word_constants(q: int, t: int) -> None:
    single = t / theory.word_rate(q, t)
    following = (t + 1) / theory.word_rate(q, t + 1)
    print(_row(f"c(t={t})", f"{single:.4f} ({single:.2f})"))
    print(_row(f"c(t={t + 1})", f"{following:.4f} ({following:.2f})"))
    print(_row("vc window", f"{single:.2f} lg n .. {following:.2f} lg n -> vc = {t + 1}"))
    if t < 2:
        return
    for r in range(1, t):
        print(_row(f"correlation r={r}", theory.correlation_constant(t, q, r)))
    print(_row("argmax r", theory.correlation_argmax(t, q)))
    print(_row("monotone ratio", _verdict(theory.lemma27_check(q, t))))
    print(_row("overlap below single", _verdict(theory.lemma29_check(t, q))))
    if t >= 3:
        check = theory.ineq7_check(t, q)
        verdict = "excluded" if check.excluded else _verdict(check.holds)
        print(_row("sufficient inequality", f"{verdict} ({check.lhs:g} <= {check.rhs:g})"))
        if check.note:
            print(_row("", check.note))


def _perm_constants() -> None:
    print(f"{'constant':<28}{'computed':<12}{'reported':<12}match")
    for constant in theory.perm_analysis_constants().as_list():
        match = "yes" if constant.matches else f"no (rounds to {constant.rounded:.2f})"
        print(f"{constant.name:<28}{constant.value:<12.4f}{constant.reported:<12.2f}{match}")
    print(_row("one-overlap base", str(theory.conditional_missing_base(6, 1))))
    print(_row("two-overlap base", str(theory.prefactored_base(2, 2))))


def _cmd_constants(args: argparse.Namespace) -> int:
    if args.kind == ArrayKind.PERMS.value:
        _perm_constants()
    else:
        _word_constants(args.q, args.t)
    return 0


def _cmd_scan(args: argparse.Namespace) -> int:
    try:
        cfg = ScanConfig(
            kind=args.kind,
            n=args.n,
            q=args.q if args.kind == ArrayKind.WORDS.value else None,
            t=args.t,
            k_min=args.k_min,
            k_max=args.k_max,
            k_step=args.k_step,
            trials=args.trials,
            seed=args.seed,
            workers=args.threads,
            output=args.out,
            format=args.format,
        )
    except ValidationError as exc:
        raise ParameterError(f"invalid scan configuration: {exc}") from exc
    records = threshold_scan(cfg)
    try:
        logger.info(f"Empirical threshold k* = {empirical_threshold(records):.2f}")
    except ThresholdNotFoundError as exc:
        logger.info(str(exc))
    return 0


def _cmd_moments(args: argparse.Namespace) -> int:
    record = mc_second_moment(
        args.kind, args.n, args.q, args.t, args.k, args.trials, args.seed, workers=args.threads
    )
    print(record.model_dump_json())
    return 0


def _cmd_table1() -> None:
    print(f"{'g':<4}{'d':<4}{'count':<8}{'complement/120':<16}reported/100")
    for (g, d), entry in oracles.table1_joint_counts().items():
        if (g, d) not in oracles.TABLE1_ROWS:
            continue
        reported = oracles.TABLE1_REPORTED[(g, d)]
        print(f"{g:<4}{d:<4}{entry.count:<8}{entry.complement:<16}{reported}")
    print(f"note: {oracles.TABLE1_DENOMINATOR_NOTE}")


def _cmd_overlap2() -> None:
    for case, probability in oracles.overlap2_joint_probs().items():
        numerator = probability.numerator * (24 // probability.denominator)
        print(f"{case:<16}{numerator}/24" if numerator else f"{case:<16}0")


def _cmd_exact(args: argparse.Namespace) -> None:
    probability = theory.exact_prob_tuple_covered(args.k, args.arity)
    print(_row("P(tuple covered)", repr(probability)))
    if args.n is not None and args.t is not None:
        expected = theory.exact_expected_unshattered(args.n, args.k, args.t, args.arity)
        print(_row("E(X)", expected))


def _cmd_pair(args: argparse.Namespace) -> None:
    if args.kind == ArrayKind.PERMS.value:
        geometry = oracles.OverlapGeometry.default(args.r)
        estimate = oracles.mc_pair_correlation(
            geometry, args.k, args.trials, args.seed, workers=args.threads
        )
        bound = oracles.pair_union_bound(geometry, args.k)
    else:
        estimate = oracles.mc_word_pair_correlation(
            args.t, args.q, args.r, args.k, args.trials, args.seed, workers=args.threads
        )
        bound = theory.lemma25_bound(args.t, args.q, args.r, args.k)
    allowance = oracles.mc_upper_allowance(bound, args.trials)
    print(_row("estimate", repr(estimate)))
    print(_row("bound", repr(bound)))
    print(_row("allowance", repr(allowance)))
    print(_row("within allowance", _verdict(estimate <= allowance)))


def _cmd_oracle(args: argparse.Namespace) -> int:
    if args.oracle == "table1":
        _cmd_table1()
    elif args.oracle == "overlap2":
        _cmd_overlap2()
    elif args.oracle == "exact-expect":
        _cmd_exact(args)
    else:
        _cmd_pair(args)
    return 0


COMMANDS = {
    "gen": _cmd_gen,
    "check": _cmd_check,
    "vc": _cmd_vc,
    "scan": _cmd_scan,
    "moments": _cmd_moments,
    "oracle": _cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.log_level)

    if args.command == "theory":
        handler = _cmd_thresholds if args.table == "thresholds" else _cmd_constants
    else:
        handler = COMMANDS[args.command]

    try:
        return handler(args)
    except (ValueError, LookupError, RuntimeError, OSError) as exc:
        logger.error(f"{args.command} failed: {exc}")
        parser.exit(2)


if __name__ == "__main__":
    sys.exit(main())
