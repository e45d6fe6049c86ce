"""Command line entry point: ``bspir simulate | verify-privacy | golden``."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .adversary import STRATEGIES
from .csa import InvalidParamsError
from .harness import RunConfig, emit_report, run_golden, run_trials
from .oracle import (
    MUTATIONS,
    EnumerationTooLargeError,
    check_correctness_exhaustive,
    check_query_privacy,
    check_storage_security,
    check_symmetric_privacy,
)

# verify-privacy runs on the smallest valid instance unless told otherwise
VERIFY_DEFAULTS = {"n": 5, "b": 1, "k": 2}
# correctness is enumerated below this many cases and sampled above it
CORRECTNESS_EXHAUSTIVE_LIMIT = 5_000_000


def _server_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated server indices, got {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--n", type=int)
    common.add_argument("--b", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--q", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--strategy", choices=sorted(STRATEGIES) + ["all"])
    common.add_argument("--byz-set", type=_server_list, dest="byz_set")
    common.add_argument("--trials", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--fast", action="store_true", default=None, help="stop at the first consistent candidate")
    common.add_argument("--output", help="write the JSON report here instead of stdout")

    parser = argparse.ArgumentParser(prog="bspir", description=__doc__)
    sub = parser.add_subparsers(dest="mode", required=True)
    sub.add_parser("simulate", parents=[common], help="seeded end-to-end retrieval trials")
    verify = sub.add_parser("verify-privacy", parents=[common], help="exhaustive privacy and correctness checks")
    verify.add_argument("--mutation", choices=sorted(MUTATIONS))
    verify.add_argument("--samples", type=int, default=10_000,
                        help="draws per (coalition, index) when correctness is too large to enumerate")
    sub.add_parser("golden", parents=[common], help="reproduce the N=9, B=2, q=11 worked example")
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.mode == "verify-privacy":
        data.update(VERIFY_DEFAULTS)
        data["strategy"] = "all"
    if args.config:
        data.update(RunConfig.from_file(args.config).__dict__)
    for name in ("n", "b", "k", "q", "seed", "strategy", "byz_set", "trials", "threads", "fast"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    data["mode"] = args.mode
    return RunConfig.from_dict(data)


def _verify(config: RunConfig, mutation: Optional[str], samples: int) -> tuple[bool, dict]:
    p = config.params()
    byz_sets = [config.byz_set] if config.byz_set else None
    reports = [check_query_privacy(p, mutation), check_storage_security(p, mutation)]
    for name in config.strategies():
        reports.append(check_symmetric_privacy(p, name, byz_sets=byz_sets, mutation=mutation))
    for name in config.strategies():
        strat = STRATEGIES[name]
        exhaustive = p.q ** (p.k * p.l + 2 * p.l * p.b * p.k + 2 * p.b + strat.gamma_len(p.b)) * p.k
        reports.append(
            check_correctness_exhaustive(
                p, name, byz_sets=byz_sets, seed=config.seed,
                samples=None if exhaustive <= CORRECTNESS_EXHAUSTIVE_LIMIT else samples,
            )
        )
    for r in reports:
        print(r.summary(), file=sys.stderr)
    passed = all(r.passed is not False for r in reports)
    return passed, {"passed": passed, "reports": [r.to_record() for r in reports]}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = build_config(args)
        if config.mode == "simulate":
            report = run_trials(config)
            print(f"{report.successes}/{report.trials} decoded, rate {report.rate}", file=sys.stderr)
            emit_report(report, args.output)
            return 0 if report.passed else 1
        if config.mode == "golden":
            record = run_golden(config.params() if (config.alphas or config.fs or config.q) else None)
            for name, ok in record.checks.items():
                print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
            for line in record.mismatches:
                print(f"  {line}", file=sys.stderr)
            emit_report(record, args.output)
            return 0 if record.passed else 1
        passed, record = _verify(config, args.mutation, args.samples)
        emit_report(record, args.output)
        return 0 if passed else 1
    except (InvalidParamsError, EnumerationTooLargeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
