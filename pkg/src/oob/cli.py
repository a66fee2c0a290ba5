"""Command-line front end: single runs, epsilon sweeps, verification suites.

Exit codes: 0 for success (and for a verification that passed), 1 for a
verification that ran fine but failed its bound, 2 for usage errors.
Output is deterministic byte-for-byte given identical flags and seed; when
``--seed`` is absent the ``OOB_SEED`` environment variable is used, then 0.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

from .analysis import (
    VerificationReport,
    baseline_separation,
    event_c_check,
    lemma3_mc,
    pac_estimate,
)
from .optimizer import RunResult, compute_h_max, run_oob
from .rng import MASK64, derive_seed

__all__ = ["CSV_HEADER", "SweepRow", "main", "run_sweep"]

CSV_HEADER = ("epsilon", "seed", "n_evals", "m_hat", "t_hat", "h_max", "ln2_inv_eps")

DEFAULT_SWEEP_EPSILONS = (0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001)


@dataclass(frozen=True)
class SweepRow:
    """One optimizer run flattened for CSV/JSON emission."""

    epsilon: float
    seed: int
    n_evals: int
    m_hat: float
    t_hat: float
    h_max: int
    ln2_inv_eps: float

    @classmethod
    def from_result(cls, result: RunResult) -> "SweepRow":
        return cls(
            epsilon=result.epsilon,
            seed=result.seed,
            n_evals=result.n_evals,
            m_hat=result.m_hat,
            t_hat=result.t_hat,
            h_max=result.h_max,
            ln2_inv_eps=math.log(1.0 / result.epsilon) ** 2,
        )

    def to_json_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "seed": self.seed,
            "n_evals": self.n_evals,
            "m_hat": self.m_hat,
            "t_hat": self.t_hat,
            "h_max": self.h_max,
            "ln2_inv_eps": self.ln2_inv_eps,
        }

    def to_csv_fields(self) -> list[str]:
        return [
            _real(self.epsilon),
            str(self.seed),
            str(self.n_evals),
            _real(self.m_hat),
            _real(self.t_hat),
            str(self.h_max),
            _real(self.ln2_inv_eps),
        ]


def _real(x: float) -> str:
    # 17 significant digits round-trip any double exactly.
    return format(x, ".17g")


def run_sweep(epsilons: tuple[float, ...], trials: int, seed: int) -> list[SweepRow]:
    """Rows for every (epsilon, trial) pair, grouped by epsilon in given order.

    Trial j uses the derived seed ``derive_seed(seed, j)`` at every epsilon,
    so runs are paired across epsilon levels and reproducible one-by-one
    with ``run --epsilon E --seed <row seed>``.
    """
    rows = []
    for epsilon in epsilons:
        for j in range(trials):
            rows.append(SweepRow.from_result(run_oob(epsilon, derive_seed(seed, j))))
    return rows


class _UsageError(Exception):
    pass


def _parse_epsilon(text: str, *, allow_half: bool = False) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    top = "1/2 inclusive" if allow_half else "1/2"
    ok = 0.0 < value <= 0.5 if allow_half else 0.0 < value < 0.5
    if not ok:
        raise argparse.ArgumentTypeError(
            f"epsilon must satisfy 0 < epsilon < {top}, got {text}"
        )
    return value


def _epsilon_strict(text: str) -> float:
    return _parse_epsilon(text)


def _epsilon_to_half(text: str) -> float:
    return _parse_epsilon(text, allow_half=True)


def _epsilon_list(text: str) -> tuple[float, ...]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty epsilon list")
    return tuple(_epsilon_strict(p.strip()) for p in parts)


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0 or value > MASK64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {text}")
    return value


def _positive(name: str):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if value < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1, got {text}")
        return value

    return parse


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("OOB_SEED")
    if env is None:
        return 0
    try:
        return _seed(env)
    except argparse.ArgumentTypeError as exc:
        raise _UsageError(f"OOB_SEED: {exc}") from None


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _report_json(report: VerificationReport) -> str:
    return json.dumps(report.to_json_dict(), indent=2) + "\n"


def _cmd_run(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    row = SweepRow.from_result(run_oob(args.epsilon, seed))
    _write_text(args.out, json.dumps(row.to_json_dict(), indent=2) + "\n")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    rows = run_sweep(args.epsilons, args.trials, seed)
    if args.format == "json":
        text = json.dumps([row.to_json_dict() for row in rows], indent=2) + "\n"
        _write_text(args.out, text)
        return 0
    if args.out is None:
        _write_csv(sys.stdout, rows)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            _write_csv(handle, rows)
    return 0


def _write_csv(handle, rows: list[SweepRow]) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.to_csv_fields())


def _cmd_verify(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    report = args.suite_runner(args, seed)
    _write_text(args.out, _report_json(report))
    return 0 if report.passed else 1


def _suite_pac(args: argparse.Namespace, seed: int) -> VerificationReport:
    return pac_estimate(args.epsilon, args.trials, args.draws, seed)


def _suite_lemma3(args: argparse.Namespace, seed: int) -> VerificationReport:
    oracle_depth = args.oracle_depth if args.oracle_depth is not None else args.depth + 6
    return lemma3_mc(args.depth, args.eta, args.trials, oracle_depth, seed)


def _suite_eventc(args: argparse.Namespace, seed: int) -> VerificationReport:
    return event_c_check(args.epsilon, args.depth, args.trials, seed)


def _suite_baseline(args: argparse.Namespace, seed: int) -> VerificationReport:
    return baseline_separation(epsilons=args.epsilons, trials=args.trials, seed=seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oob",
        description=(
            "Optimistic optimization of a lazily sampled Brownian motion, "
            "plus statistical verification suites."
        ),
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_p = commands.add_parser("run", help="one optimizer run, emitted as JSON")
    run_p.add_argument("--epsilon", type=_epsilon_strict, required=True)
    _add_common(run_p)
    run_p.set_defaults(handler=_cmd_run)

    sweep_p = commands.add_parser("sweep", help="many runs per epsilon, CSV or JSON")
    sweep_p.add_argument(
        "--epsilons",
        type=_epsilon_list,
        default=DEFAULT_SWEEP_EPSILONS,
        help="comma-separated list (default %(default)s)",
    )
    sweep_p.add_argument("--trials", type=_positive("trials"), default=250)
    sweep_p.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_common(sweep_p)
    sweep_p.set_defaults(handler=_cmd_sweep)

    verify_p = commands.add_parser("verify", help="run one verification suite")
    suites = verify_p.add_subparsers(dest="suite", required=True)

    pac_p = suites.add_parser("pac", help="exceedance rate of the final answer")
    pac_p.add_argument("--epsilon", type=_epsilon_strict, default=0.1)
    pac_p.add_argument("--trials", type=_positive("trials"), default=500)
    pac_p.add_argument("--draws", type=_positive("draws"), default=100)
    _add_common(pac_p)
    pac_p.set_defaults(handler=_cmd_verify, suite_runner=_suite_pac)

    lemma3_p = suites.add_parser("lemma3", help="near-optimal count bound")
    lemma3_p.add_argument("--depth", type=int, default=6, help="grid depth h")
    lemma3_p.add_argument("--eta", type=float, default=0.1)
    lemma3_p.add_argument("--trials", type=_positive("trials"), default=10000)
    lemma3_p.add_argument(
        "--oracle-depth",
        type=int,
        default=None,
        help="fine-grid depth for the maximum reference (default: depth + 6)",
    )
    _add_common(lemma3_p)
    lemma3_p.set_defaults(handler=_cmd_verify, suite_runner=_suite_lemma3)

    eventc_p = suites.add_parser("eventc", help="simultaneous bound violations")
    eventc_p.add_argument("--epsilon", type=_epsilon_to_half, default=0.5)
    eventc_p.add_argument("--depth", type=_positive("depth"), default=10)
    eventc_p.add_argument("--trials", type=_positive("trials"), default=100000)
    _add_common(eventc_p)
    eventc_p.set_defaults(handler=_cmd_verify, suite_runner=_suite_eventc)

    baseline_p = suites.add_parser("baseline", help="grid size vs optimizer cost")
    baseline_p.add_argument(
        "--epsilons",
        type=_epsilon_list,
        default=(0.05, 0.01),
        help="strictly decreasing targets (default %(default)s)",
    )
    baseline_p.add_argument("--trials", type=_positive("trials"), default=101)
    _add_common(baseline_p)
    baseline_p.set_defaults(handler=_cmd_verify, suite_runner=_suite_baseline)

    return parser


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=_seed, default=None, help="default: $OOB_SEED, else 0")
    sub.add_argument("--out", default=None, help="output path (default: stdout)")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except _UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # Domain errors that slipped past flag validation are usage errors.
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
