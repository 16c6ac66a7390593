"""Monte Carlo engine for recovery experiments.

Trial ``t`` of an experiment runs on the instance seeded by
``derive_key(base_seed, TAG_TRIAL, t)``; each trial is reduced to a small
:class:`TrialRecord` as soon as it finishes and records are folded in trial
order. Reports are therefore identical for any number of worker threads.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .errors import NonFiniteDivergence, SeqSparseError, TrialError
from .procedures import FixedSample, ProblemInstance, run_procedure
from .streams import TAG_TRIAL, derive_key

THREADS_ENV = "SEQSPARSE_THREADS"
Z95 = 1.959963984540054


@dataclass(frozen=True)
class ExperimentSpec:
    n: int
    s: int
    pair: object
    procedure: object
    trials: int
    base_seed: int = 0
    support_placement: str = "uniform_random"
    name: str = ""

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.s < 1 or 2 * self.s > self.n:
            raise ValueError(f"need 1 <= s <= n/2, got s={self.s}, n={self.n}")
        if self.support_placement not in ("uniform_random", "fixed_first_s"):
            raise ValueError(f"unknown support placement {self.support_placement!r}")

    @property
    def budget(self):
        """Per-dimension budget ``m`` declared by the procedure, or None (SPRT)."""
        return getattr(self.procedure, "m", None)


@dataclass
class TrialRecord:
    exact: bool
    false_positives: int
    false_negatives: int
    total_samples: int
    truncated: bool
    # thresholding: null components entering / surviving each pass
    null_entering: np.ndarray = None
    null_surviving: np.ndarray = None
    # SPRT: per-hypothesis Wald identity terms over untruncated components,
    # rows = (null, alt), columns = (count, sum J, sum L, sum r, sum r^2)
    wald: np.ndarray = None
    # SPRT overshoot past the exit threshold: (lower count, lower sum, upper count, upper sum)
    overshoot: np.ndarray = None


@dataclass(frozen=True)
class MonteCarloReport:
    spec: ExperimentSpec
    trials: int
    fwer_hat: float
    fwer_halfwidth: float
    alpha_hat: float
    beta_hat: float
    avg_samples_per_dim: float
    budget_ok: bool
    truncation_rate: float
    bound_context: bounds.BoundReport
    mean_total_samples: float
    se_total_samples: float
    conditional_mean_total_samples: float
    conditional_se_total_samples: float
    conditional_trials: int
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentFailure:
    """Placeholder for a sweep entry whose experiment raised."""

    spec: ExperimentSpec
    error: str
    trial: int = None
    seed: int = None


def worker_count(threads=None):
    """Threads to use: explicit value, else ``SEQSPARSE_THREADS``, else CPU count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def trial_seed(base_seed, trial):
    return derive_key(base_seed, TAG_TRIAL, trial)


def fwer_oracle(alpha, beta, n, s):
    """``1 - (1-beta)**s (1-alpha)**(n-s)``: FWER under independent component errors."""
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0):
        raise ValueError("alpha and beta must lie in [0, 1]")
    log_ok = 0.0
    for p, k in ((beta, s), (alpha, n - s)):
        if k == 0 or p == 0.0:
            continue
        if p == 1.0:
            return 1.0
        log_ok += k * math.log1p(-p)
    return -math.expm1(log_ok)


def binomial_halfwidth(successes, total, z=Z95):
    """95% half-width: normal approximation, Wilson when either count is below 10."""
    if total == 0:
        return math.nan
    p = successes / total
    if min(successes, total - successes) >= 10:
        return z * math.sqrt(p * (1 - p) / total)
    denom = 1 + z * z / total
    centre = (p + z * z / (2 * total)) / denom
    spread = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return max(centre + spread - p, p - (centre - spread))


def _pair_stats(pair):
    try:
        return pair.llr_stats()
    except NonFiniteDivergence:
        return None


def _record(spec, instance, outcome, stats):
    rec = TrialRecord(
        exact=outcome.exact,
        false_positives=outcome.false_positives,
        false_negatives=outcome.false_negatives,
        total_samples=outcome.total_samples,
        truncated=outcome.truncated,
    )
    if outcome.null_active_per_step:
        counts = np.asarray(outcome.null_active_per_step, dtype=np.int64)
        rec.null_entering, rec.null_surviving = counts[:-1], counts[1:]
    if outcome.stopping_llr is not None and stats is not None:
        th = bounds.sprt_thresholds(spec.n, spec.s, spec.procedure.epsilon)
        L = outcome.stopping_llr
        J = outcome.samples_per_index.astype(float)
        decided = (L < th.log_gamma_L) | (L > th.log_gamma_U)
        wald = np.zeros((2, 5))
        for row, members, drift in ((0, ~instance.mask, -stats.d01), (1, instance.mask, stats.d10)):
            sel = members & decided
            if drift != 0 and sel.any():
                r = J[sel] - L[sel] / drift
                wald[row] = (sel.sum(), J[sel].sum(), L[sel].sum(), r.sum(), (r * r).sum())
        low = L < th.log_gamma_L
        high = L > th.log_gamma_U
        rec.wald = wald
        rec.overshoot = np.array(
            [low.sum(), (th.log_gamma_L - L[low]).sum(), high.sum(), (L[high] - th.log_gamma_U).sum()]
        )
    return rec


def run_trial(spec, trial, stats=None):
    seed = trial_seed(spec.base_seed, trial)
    try:
        instance = ProblemInstance.generate(spec.n, spec.s, seed, spec.support_placement)
        outcome = run_procedure(instance, spec.pair, spec.procedure)
    except SeqSparseError as exc:
        raise TrialError(f"trial {trial} (seed {seed}) failed: {exc}", trial, seed) from exc
    return _record(spec, instance, outcome, stats)


def _mean_se(x):
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def _is_sequential(procedure):
    return not isinstance(procedure, FixedSample)


def aggregate(spec, records, stats):
    """Fold trial records (in trial order) into a report."""
    T = len(records)
    n, s = spec.n, spec.s
    failures = sum(not r.exact for r in records)
    fp = sum(r.false_positives for r in records)
    fn = sum(r.false_negatives for r in records)
    totals = np.array([r.total_samples for r in records], dtype=float)
    mean_total, se_total = _mean_se(totals)
    clean = np.array([r.false_negatives == 0 for r in records])
    cond_mean, cond_se = _mean_se(totals[clean])

    m = spec.budget
    if m is None:
        budget_ok = True
    else:
        ref_mean, ref_se = (cond_mean, cond_se) if clean.any() else (mean_total, se_total)
        budget_ok = bool(ref_mean <= n * m + 3 * ref_se)

    a_hat = fp / ((n - s) * T)
    b_hat = fn / (s * T)
    diagnostics = {
        "alpha_se": math.sqrt(a_hat * (1 - a_hat) / ((n - s) * T)),
        "beta_se": math.sqrt(b_hat * (1 - b_hat) / (s * T)),
        "false_positive_events": fp,
        "false_negative_events": fn,
        "null_components": (n - s) * T,
        "alt_components": s * T,
    }
    diagnostics["fwer_oracle"] = fwer_oracle(a_hat, b_hat, n, s)
    if records[0].null_entering is not None:
        width = max(len(r.null_entering) for r in records)
        entering = np.zeros(width, dtype=np.int64)
        surviving = np.zeros(width, dtype=np.int64)
        for r in records:
            entering[: len(r.null_entering)] += r.null_entering
            surviving[: len(r.null_surviving)] += r.null_surviving
        diagnostics["null_entering_per_step"] = entering.tolist()
        diagnostics["null_surviving_per_step"] = surviving.tolist()
        diagnostics["null_pass_survival"] = float(surviving.sum() / entering.sum()) if entering.sum() else math.nan
        diagnostics["null_survived_all"] = int(surviving[-1])
    if records[0].wald is not None:
        wald = sum(r.wald for r in records)
        over = sum(r.overshoot for r in records)
        for row, label in ((0, "null"), (1, "alt")):
            count, sum_j, sum_l, sum_r, sum_r2 = wald[row]
            if count > 1:
                mean_r = sum_r / count
                var_r = max(sum_r2 / count - mean_r**2, 0.0) * count / (count - 1)
                diagnostics[f"wald_{label}_count"] = int(count)
                diagnostics[f"wald_{label}_mean_J"] = sum_j / count
                diagnostics[f"wald_{label}_mean_L"] = sum_l / count
                diagnostics[f"wald_{label}_residual"] = mean_r
                diagnostics[f"wald_{label}_residual_se"] = math.sqrt(var_r / count)
        diagnostics["overshoot_lower_mean"] = over[1] / over[0] if over[0] else math.nan
        diagnostics["overshoot_upper_mean"] = over[3] / over[2] if over[2] else math.nan

    regime_m = m if m is not None else mean_total / n
    delta = getattr(spec.procedure, "delta", 0.1)
    if stats is not None:
        context = bounds.regime_report(regime_m, n, s, stats, sequential=_is_sequential(spec.procedure), delta=delta)
    else:
        context = bounds.BoundReport(0.0, 0.0, bounds.Regime.INDETERMINATE, {"n": n, "s": s, "m": regime_m})

    return MonteCarloReport(
        spec=spec,
        trials=T,
        fwer_hat=failures / T,
        fwer_halfwidth=binomial_halfwidth(failures, T),
        alpha_hat=a_hat,
        beta_hat=b_hat,
        avg_samples_per_dim=mean_total / n,
        budget_ok=budget_ok,
        truncation_rate=sum(r.truncated for r in records) / T,
        bound_context=context,
        mean_total_samples=mean_total,
        se_total_samples=se_total,
        conditional_mean_total_samples=cond_mean,
        conditional_se_total_samples=cond_se,
        conditional_trials=int(clean.sum()),
        diagnostics=diagnostics,
    )


def run_experiment(spec, threads=None):
    """Run every trial of ``spec`` and aggregate.

    Raises :class:`TrialError` (chained to the procedure's exception) naming
    the first failing trial and its seed.
    """
    stats = _pair_stats(spec.pair)
    workers = min(worker_count(threads), spec.trials)
    if workers == 1:
        records = [run_trial(spec, t, stats) for t in range(spec.trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda t: run_trial(spec, t, stats), range(spec.trials)))
    return aggregate(spec, records, stats)


def sweep(specs, threads=None):
    """Run several experiments; failures become :class:`ExperimentFailure` entries."""
    results = []
    for spec in specs:
        try:
            results.append(run_experiment(spec, threads=threads))
        except TrialError as exc:
            results.append(ExperimentFailure(spec, str(exc), exc.trial, exc.seed))
        except SeqSparseError as exc:
            results.append(ExperimentFailure(spec, str(exc)))
    return results


