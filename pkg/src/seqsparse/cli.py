"""Command-line front end.

::

    seqsparse bounds --n 4096 --s 16 --family gaussian --theta 2
    seqsparse run --config exp.cfg --out results/ [--seed N] [--trials N]
    seqsparse sweep --config grid.cfg --out results/

``run`` stops at the first experiment that fails; ``sweep`` records the
failure and carries on. Both write ``results.csv`` and ``summary.txt`` and
exit with status 0 only if every experiment completed. Worker threads are
capped by ``SEQSPARSE_THREADS``.
"""

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import bounds
from .config import parse_config
from .distributions import BernoulliPair, GaussianShift
from .errors import (
    ConfigParseError,
    ConfigValidationError,
    DivergenceZero,
    NotPositive,
    SeqSparseError,
    TrialError,
)
from .harness import ExperimentFailure, run_experiment, sweep
from .report import emit_report, fmt

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_path: Path = None
    output_dir: Path = None
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in ("bounds", "run", "sweep"):
            raise ValueError(f"unknown command {self.command!r}")


def _pair_from_flags(args):
    if args.family == "gaussian":
        return GaussianShift(theta=args.theta)
    return BernoulliPair(p0=args.p0, p1=args.p1)


def bounds_table(n, s, pair, delta=0.1, epsilon=0.1, rho=0.5):
    """Lines of the four-regime table for one instance.

    Raises DivergenceZero when the pair cannot be told apart.
    """
    stats = pair.llr_stats()
    if stats.d01 <= 0 or stats.d10 <= 0:
        raise DivergenceZero(f"the null and alternative are indistinguishable (d01={stats.d01}, d10={stats.d10})")
    seq = bounds.seq_rate(s, stats)
    nonseq = bounds.nonseq_rate(n, stats)
    lines = [
        f"n={n} s={s} d01={fmt(stats.d01)} d10={fmt(stats.d10)} var01={fmt(stats.var01)}",
        f"{'regime':<38}{'samples/dim':>12}  formula",
        f"{'necessary, sequential':<38}{fmt(seq):>12}  ln s / D(P0||P1)",
        f"{'necessary, non-sequential':<38}{fmt(nonseq):>12}  ln n / D(P1||P0)",
        f"{'sufficient, SPRT':<38}{fmt((1 + epsilon) * seq):>12}  (1+eps) ln s / D(P0||P1), eps={fmt(epsilon)}",
        f"{'sufficient, sequential thresholding':<38}{fmt(seq):>12}  any m above ln s / D(P0||P1), asymptotically",
    ]
    notes = []
    if s == 1:
        notes.append("note: s = 1 gives ln s = 0, so the sequential rates are degenerate (0)")
    else:
        lb = bounds.seq_lower_bound(s, delta, stats)
        notes.append(
            f"finite-sample: any sequential procedure with m <= {fmt(lb.m_required)} has "
            f"failure probability >= {fmt(lb.pe_floor)} (delta={fmt(delta)})"
        )
    if isinstance(pair, GaussianShift):
        budget = bounds.simple_st_budget(n, s, delta, pair.theta)
        notes.append(
            f"finite-sample: simple thresholding reaches failure probability <= {fmt(delta)} "
            f"for m > {fmt(budget)} (smallest even m: {bounds.even_budget_above(budget)}, "
            f"{bounds.simple_st_passes(n, delta)} passes)"
        )
    K = bounds.st_passes(n, s, delta, rho)
    try:
        cn = bounds.st_cn(n, s, seq, rho, K, stats, delta=delta)
        notes.append(
            f"finite-sample: sequential thresholding (rho={fmt(rho)}, K={K}) has c_n = {fmt(cn.c_n)}, "
            f"sufficient m = {fmt(cn.m_sufficient)}"
        )
    except NotPositive:
        notes.append(f"finite-sample: sequential thresholding constant c_n is not positive at rho={fmt(rho)}, K={K}")
    return lines + notes


def cmd_bounds(args, out=None):
    try:
        pair = _pair_from_flags(args)
        if args.s < 1 or 2 * args.s > args.n:
            raise ValueError(f"need 1 <= s <= n/2, got s={args.s}, n={args.n}")
        lines = bounds_table(args.n, args.s, pair, args.delta, args.epsilon, args.rho)
    except DivergenceZero as exc:
        print(f"error: {exc}; no finite sample size recovers the support", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, SeqSparseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print("\n".join(lines), file=out or sys.stdout)
    return EXIT_OK


def _load(manifest):
    text = Path(manifest.config_path).read_text(encoding="utf-8")
    return parse_config(text, manifest.overrides)


def _prepare_output(path):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory {path} is not writable")
    return path


def cmd_run(manifest, stop_on_failure=True):
    specs = _load(manifest)
    out = _prepare_output(manifest.output_dir)
    if stop_on_failure:
        results = []
        for spec in specs:
            try:
                results.append(run_experiment(spec))
            except TrialError as exc:
                results.append(ExperimentFailure(spec, str(exc), exc.trial, exc.seed))
                break
            except SeqSparseError as exc:
                results.append(ExperimentFailure(spec, str(exc)))
                break
    else:
        results = sweep(specs)
    emit_report(results, out)
    failures = [r for r in results if isinstance(r, ExperimentFailure)]
    for f in failures:
        print(f"error: experiment {f.spec.name or '?'} failed: {f.error}", file=sys.stderr)
    print(f"wrote {out / 'results.csv'} ({len(results) - len(failures)} of {len(specs)} experiments)")
    return EXIT_OK if not failures and len(results) == len(specs) else EXIT_FAILED


def build_parser():
    parser = argparse.ArgumentParser(prog="seqsparse", description="Sequential sparse support recovery experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="print the sample-complexity regimes for one instance")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--s", type=int, required=True)
    b.add_argument("--family", choices=("gaussian", "bernoulli"), default="gaussian")
    b.add_argument("--theta", type=float, default=1.0)
    b.add_argument("--p0", type=float, default=0.5)
    b.add_argument("--p1", type=float, default=0.5)
    b.add_argument("--delta", type=float, default=0.1)
    b.add_argument("--epsilon", type=float, default=0.1)
    b.add_argument("--rho", type=float, default=0.5)

    r = sub.add_parser("run", help="run every experiment in a config, stopping at the first failure")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--trials", type=int)

    s = sub.add_parser("sweep", help="run every experiment in a config, recording failures")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "bounds":
        return cmd_bounds(args)
    overrides = {k: getattr(args, k, None) for k in ("seed", "trials")}
    manifest = RunManifest(
        command=args.command,
        config_path=Path(args.config),
        output_dir=Path(args.out),
        overrides={k: v for k, v in overrides.items() if v is not None},
    )
    try:
        return cmd_run(manifest, stop_on_failure=args.command == "run")
    except (ConfigParseError, ConfigValidationError) as exc:
        print(f"error: {manifest.config_path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
