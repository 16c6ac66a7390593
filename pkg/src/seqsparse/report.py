"""CSV and prose serialization of Monte Carlo reports.

Numbers are printed with ``format(x, ".6g")``, which is locale independent
and uses ``.`` as the decimal separator, so output files diff cleanly across
platforms. Fields that do not apply to a row are left empty.
"""

import csv
from pathlib import Path

from . import bounds
from .distributions import BernoulliPair, GaussianShift
from .errors import DivergenceZero, NonFiniteDivergence
from .harness import ExperimentFailure
from .procedures import GeneralST, SimpleST, Sprt

HEADER = (
    "n,s,m,procedure,family,theta,delta,rho,epsilon,trials,fwer_hat,fwer_ci,alpha_hat,beta_hat,"
    "avg_samples_per_dim,budget_ok,truncation_rate,seq_rate,nonseq_rate,regime"
).split(",")


def fmt(x):
    """Six significant digits; empty for None."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return format(float(x) + 0.0, ".6g")  # + 0.0 folds -0 into 0


def _rates(spec):
    """Asymptotic sequential and fixed-sample rates, None when undefined."""
    try:
        stats = spec.pair.llr_stats()
    except NonFiniteDivergence:
        return None, None
    try:
        seq = bounds.seq_rate(spec.s, stats)
    except DivergenceZero:
        seq = None
    try:
        nonseq = bounds.nonseq_rate(spec.n, stats)
    except DivergenceZero:
        nonseq = None
    return seq, nonseq


def report_row(report):
    """CSV row (list of strings) for one report, in HEADER order."""
    spec = report.spec
    proc, pair = spec.procedure, spec.pair
    seq, nonseq = _rates(spec)
    values = {
        "n": spec.n,
        "s": spec.s,
        "m": spec.budget,
        "procedure": proc.name,
        "family": pair.kind.value,
        "theta": pair.theta if isinstance(pair, GaussianShift) else None,
        "delta": proc.delta if isinstance(proc, (SimpleST, GeneralST)) else None,
        "rho": proc.rho if isinstance(proc, GeneralST) else None,
        "epsilon": proc.epsilon if isinstance(proc, Sprt) else None,
        "trials": report.trials,
        "fwer_hat": report.fwer_hat,
        "fwer_ci": report.fwer_halfwidth,
        "alpha_hat": report.alpha_hat,
        "beta_hat": report.beta_hat,
        "avg_samples_per_dim": report.avg_samples_per_dim,
        "budget_ok": report.budget_ok,
        "truncation_rate": report.truncation_rate,
        "seq_rate": seq,
        "nonseq_rate": nonseq,
        "regime": report.bound_context.regime.value,
    }
    return [fmt(values[key]) if key not in ("procedure", "family", "regime") else values[key] for key in HEADER]


def _family_text(pair):
    if isinstance(pair, GaussianShift):
        return f"N(0,1) vs N({fmt(pair.theta)},1)"
    if isinstance(pair, BernoulliPair):
        return f"Bernoulli({fmt(pair.p0)}) vs Bernoulli({fmt(pair.p1)})"
    return type(pair).__name__


def summary_text(results):
    """Human-readable summary of reports and failures, one paragraph each."""
    lines = []
    for item in results:
        spec = item.spec
        title = spec.name or f"{spec.procedure.name} n={spec.n} s={spec.s}"
        lines.append(f"== {title} ==")
        lines.append(f"{spec.procedure.name} on {_family_text(spec.pair)}, n={spec.n}, s={spec.s}")
        if isinstance(item, ExperimentFailure):
            lines.append(f"FAILED: {item.error}")
            lines.append("")
            continue
        r = item
        lines.append(
            f"exact recovery failed in {fmt(r.fwer_hat)} of {r.trials} trials (95% +/- {fmt(r.fwer_halfwidth)})"
        )
        lines.append(f"per-component error: false positive {fmt(r.alpha_hat)}, false negative {fmt(r.beta_hat)}")
        line = f"average samples per dimension {fmt(r.avg_samples_per_dim)}"
        if spec.budget is not None:
            line += f" against a budget of {spec.budget} ({'within' if r.budget_ok else 'over'} budget)"
        lines.append(line)
        if r.truncation_rate:
            lines.append(f"truncated trials: {fmt(r.truncation_rate)}")
        ctx = r.bound_context
        lines.append(f"regime: {ctx.regime.value} (reference rate {fmt(ctx.m_required)} samples per dimension)")
        if "fwer_oracle" in r.diagnostics:
            lines.append(f"independence prediction of the failure rate: {fmt(r.diagnostics['fwer_oracle'])}")
        lines.append("")
    return "\n".join(lines)


def emit_report(results, directory):
    """Write ``results.csv`` and ``summary.txt`` into an existing directory.

    ``results`` may mix MonteCarloReport and ExperimentFailure entries;
    failures appear only in the summary. Returns the written paths.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"output directory {directory} does not exist")
    csv_path = directory / "results.csv"
    with open(csv_path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for item in results:
            if not isinstance(item, ExperimentFailure):
                writer.writerow(report_row(item))
    summary_path = directory / "summary.txt"
    summary_path.write_text(summary_text(results), encoding="utf-8")
    return [csv_path, summary_path]


def read_results(path):
    """Parse a ``results.csv`` back into dicts of floats, strings and None."""
    rows = []
    with open(path, newline="", encoding="ascii") as fh:
        for raw in csv.DictReader(fh):
            row = {}
            for key, value in raw.items():
                if value == "":
                    row[key] = None
                elif key in ("procedure", "family", "regime"):
                    row[key] = value
                elif key == "budget_ok":
                    row[key] = value == "true"
                else:
                    row[key] = float(value)
            rows.append(row)
    return rows
