"""Coordinate-wise support recovery procedures.

Four procedures share one calling convention: ``run_*(instance, pair, cfg,
streams=None)`` returns a :class:`RecoveryOutcome`. Component ``i`` only ever
reads its own substream (keyed by the instance seed, the component label and
the step), so outcomes do not depend on how work is blocked or ordered.

Component indices are 0-based: ``0 .. n-1``.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import bounds
from .distributions import BernoulliPair, GaussianShift
from .errors import MismatchedInstance, QueryNotPermitted, ScheduleUnderflow, UnsupportedFamily
from .streams import TAG_SUPPORT, Substreams, derive_key, uniforms

# -- domain types ------------------------------------------------------------


@dataclass(frozen=True)
class ProblemInstance:
    n: int
    s: int
    support: tuple
    seed: int = 0

    def __post_init__(self):
        support = tuple(sorted(int(i) for i in self.support))
        object.__setattr__(self, "support", support)
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if len(set(support)) != len(support):
            raise ValueError("support indices must be distinct")
        if len(support) != self.s:
            raise ValueError(f"|support| = {len(support)} but s = {self.s}")
        if self.s < 1 or 2 * self.s > self.n:
            raise ValueError(f"need 1 <= s <= n/2, got s={self.s}, n={self.n}")
        if support and (support[0] < 0 or support[-1] >= self.n):
            raise ValueError("support indices must lie in 0..n-1")

    @classmethod
    def generate(cls, n, s, seed, placement="uniform_random"):
        """Instance with a deterministic support drawn from ``seed``."""
        if placement == "fixed_first_s":
            support = range(s)
        elif placement == "uniform_random":
            # s smallest of n keyed uniforms: a uniformly random s-subset
            u = uniforms(derive_key(seed, TAG_SUPPORT), 0, n)
            support = np.argsort(u, kind="stable")[:s]
        else:
            raise ValueError(f"unknown support placement {placement!r}")
        return cls(n=n, s=s, support=tuple(support), seed=seed)

    @cached_property
    def mask(self):
        m = np.zeros(self.n, dtype=bool)
        m[list(self.support)] = True
        return m


@dataclass
class RecoveryOutcome:
    """Estimated support plus the realized sampling of every component.

    Optional traces: ``stopping_llr`` (SPRT, log-LR at stopping per
    component), ``active_per_step`` and ``null_active_per_step`` (thresholding,
    number of components measured on each step, with the count remaining
    after the last step appended).
    """

    estimated_support: np.ndarray
    samples_per_index: np.ndarray
    total_samples: int
    exact: bool
    false_positives: int
    false_negatives: int
    truncated: bool = False
    stopping_llr: np.ndarray = None
    truncated_count: int = 0
    active_per_step: list = field(default_factory=list)
    null_active_per_step: list = field(default_factory=list)


@dataclass(frozen=True)
class FixedSample:
    m: int
    rule: str = "top_s"
    tau: float = None

    name = "fixed"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("FixedSample.m must be >= 1")
        if self.rule not in ("top_s", "llr_threshold"):
            raise ValueError(f"unknown decision rule {self.rule!r}")
        if self.rule == "llr_threshold" and self.tau is None:
            raise ValueError("llr_threshold rule needs tau")


@dataclass(frozen=True)
class Sprt:
    epsilon: float
    j_max: int = None

    name = "sprt"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("Sprt.epsilon must be > 0")
        if self.j_max is not None and self.j_max < 1:
            raise ValueError("Sprt.j_max must be >= 1")


@dataclass(frozen=True)
class SimpleST:
    delta: float
    m: int

    name = "simple_st"

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("SimpleST.delta must lie in (0, 1)")
        if self.m < 2 or self.m % 2:
            raise ValueError("SimpleST.m must be an even integer >= 2")


@dataclass(frozen=True)
class GeneralST:
    delta: float
    m: int
    rho: float = 0.5

    name = "general_st"

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("GeneralST.delta must lie in (0, 1)")
        if self.m < 1:
            raise ValueError("GeneralST.m must be >= 1")
        if not 0.5 <= self.rho < 1.0:
            raise ValueError("GeneralST.rho must lie in [1/2, 1)")


ProcedureConfig = FixedSample | Sprt | SimpleST | GeneralST


def _finish(instance, selected, samples, **extra):
    selected = np.asarray(selected, dtype=bool)
    truth = instance.mask
    fp = int(np.count_nonzero(selected & ~truth))
    fn = int(np.count_nonzero(~selected & truth))
    samples = np.asarray(samples, dtype=np.int64)
    return RecoveryOutcome(
        estimated_support=np.flatnonzero(selected),
        samples_per_index=samples,
        total_samples=int(samples.sum()),
        exact=(fp == 0 and fn == 0),
        false_positives=fp,
        false_negatives=fn,
        **extra,
    )


def _streams(instance, streams):
    return Substreams(instance.seed) if streams is None else streams


def _observe(pair, instance, streams, indices, step, start, count):
    u = streams.block(indices, step, start, count)
    return pair.transform(u, instance.mask[indices])


# -- procedures --------------------------------------------------------------


def run_fixed_sample(instance, pair, cfg, streams=None):
    """Sample every component ``cfg.m`` times, then decide once.

    ``top_s`` keeps the ``s`` largest test statistics (equivalently the
    largest LLRs for an MLR pair, so no knowledge of P1 is needed); ties go
    to the lower index. ``llr_threshold`` keeps components whose LLR exceeds
    ``cfg.tau`` and needs ``pair.alt_known``.
    """
    if cfg.rule == "llr_threshold" and not pair.alt_known:
        raise QueryNotPermitted("llr_threshold rule needs the alternative (alt_known=True)")
    streams = _streams(instance, streams)
    idx = np.arange(instance.n)
    y = _observe(pair, instance, streams, idx, 0, 0, cfg.m)
    if cfg.rule == "llr_threshold":
        selected = pair.llr(y) > cfg.tau
    else:
        score = pair.test_statistic(y)
        order = np.argsort(-score, kind="stable")
        selected = np.zeros(instance.n, dtype=bool)
        selected[order[: instance.s]] = True
    return _finish(instance, selected, np.full(instance.n, cfg.m))


def default_j_max(s, stats):
    """Truncation cap ``10**4 * ceil(ln s / d01)`` (at least ``10**4``)."""
    if stats.d01 <= 0:
        return 10**4
    return 10**4 * max(1, math.ceil(math.log(s) / stats.d01))


def run_sprt(instance, pair, cfg, streams=None, block=12):
    """One SPRT per component with thresholds ``s**-(1+eps)``, ``(n-s)**(1+eps)``.

    A component is sampled while ``log gamma_L <= L <= log gamma_U``; it is
    excluded on leaving below and included on leaving above. A component
    still undecided after ``j_max`` samples is included iff its log-LR
    exceeds the midpoint of the log thresholds, and the outcome is flagged
    ``truncated``. ``block`` only sets how many draws are generated per
    vectorized round; it does not affect the result.
    """
    if not pair.alt_known:
        raise QueryNotPermitted("the SPRT needs the alternative (alt_known=True)")
    th = bounds.sprt_thresholds(instance.n, instance.s, cfg.epsilon)
    lo, hi = th.log_gamma_L, th.log_gamma_U
    j_max = cfg.j_max if cfg.j_max is not None else default_j_max(instance.s, pair.llr_stats())
    streams = _streams(instance, streams)

    n = instance.n
    llr = np.zeros(n)
    count = np.zeros(n, dtype=np.int64)
    selected = np.zeros(n, dtype=bool)
    active = np.arange(n)
    drawn = 0
    while active.size and drawn < j_max:
        width = min(block, j_max - drawn)
        y = _observe(pair, instance, streams, active, 0, drawn, width)
        # left-to-right running sum seeded with the carried log-LR keeps the
        # result bit-identical for every block size
        inc = np.concatenate([llr[active, None], pair.llr_increments(y)], axis=1)
        path = np.cumsum(inc, axis=1)[:, 1:]
        out = (path < lo) | (path > hi)
        stops = out.any(axis=1)
        first = np.where(stops, out.argmax(axis=1), width - 1)
        final = path[np.arange(active.size), first]
        llr[active] = final
        count[active] = drawn + first + 1
        done = active[stops]
        selected[done] = final[stops] > hi
        active = active[~stops]
        drawn += width
        block = min(2 * block, 4096)
    truncated = active.size > 0
    if truncated:
        selected[active] = llr[active] > 0.5 * (lo + hi)
    return _finish(
        instance,
        selected,
        count,
        truncated=truncated,
        truncated_count=int(active.size),
        stopping_llr=llr,
    )


def _thresholding(instance, pair, streams, schedule, threshold):
    """Shared pass loop: measure survivors, keep those with statistic > threshold."""
    n = instance.n
    samples = np.zeros(n, dtype=np.int64)
    survivors = np.arange(n)
    null = ~instance.mask
    active, null_active = [], []
    for k, m_k in enumerate(schedule, start=1):
        active.append(int(survivors.size))
        null_active.append(int(np.count_nonzero(null[survivors])))
        if survivors.size == 0:
            continue
        y = _observe(pair, instance, streams, survivors, k, 0, m_k)
        samples[survivors] += m_k
        t = pair.test_statistic(y)
        survivors = survivors[t > threshold(k, m_k)]
    active.append(int(survivors.size))
    null_active.append(int(np.count_nonzero(null[survivors])))
    selected = np.zeros(n, dtype=bool)
    selected[survivors] = True
    return _finish(
        instance,
        selected,
        samples,
        active_per_step=active,
        null_active_per_step=null_active,
    )


def run_simple_st(instance, pair, cfg, streams=None):
    """Simple thresholding for ``N(0,1)`` vs ``N(theta,1)``.

    ``ceil(log2(2n/delta))`` passes, each drawing ``m/2`` fresh samples of
    every survivor and keeping those whose pass sum is positive.
    """
    if not isinstance(pair, GaussianShift):
        raise UnsupportedFamily(
            "simple thresholding is defined for GaussianShift; use run_general_st with rho=0.5"
        )
    K = bounds.simple_st_passes(instance.n, cfg.delta)
    half = cfg.m // 2
    return _thresholding(instance, pair, _streams(instance, streams), [half] * K, lambda k, m_k: 0.0)


def st_schedule(n, s, cfg):
    """``(K, [m_1, ..., m_K])`` for Sequential Thresholding."""
    K = bounds.st_passes(n, s, cfg.delta, cfg.rho)
    return K, [bounds.st_step_samples(cfg.m, k, cfg.rho, n, s, K) for k in range(1, K + 1)]


def run_general_st(instance, pair, cfg, streams=None):
    """Sequential Thresholding with null-quantile thresholds.

    On step ``k`` every survivor gets ``m_k`` fresh samples and is kept iff
    its statistic strictly exceeds ``gamma_k``, the smallest value whose null
    CDF reaches ``rho``. Only ``test_statistic`` and ``null_quantile`` are
    used, so the alternative may be hidden.
    """
    if isinstance(pair, BernoulliPair) and pair.p1 < pair.p0:
        raise UnsupportedFamily("the count of ones must increase with the LLR (need p1 >= p0)")
    K, schedule = st_schedule(instance.n, instance.s, cfg)
    if schedule[0] < 1:
        raise ScheduleUnderflow(
            f"m_1 = {schedule[0]} for m={cfg.m}, rho={cfg.rho}, K={K}, n={instance.n}, s={instance.s}; "
            f"step 1 takes no samples (need m >= {_min_budget(instance.n, instance.s, cfg)})"
        )
    thresholds = {m_k: pair.null_quantile(m_k, cfg.rho) for m_k in set(schedule)}
    return _thresholding(
        instance, pair, _streams(instance, streams), schedule, lambda k, m_k: thresholds[m_k]
    )


def _min_budget(n, s, cfg):
    K = bounds.st_passes(n, s, cfg.delta, cfg.rho)
    m = 1
    while bounds.st_step_samples(m, 1, cfg.rho, n, s, K) < 1:
        m += 1
    return m


_RUNNERS = {
    FixedSample: run_fixed_sample,
    Sprt: run_sprt,
    SimpleST: run_simple_st,
    GeneralST: run_general_st,
}


def run_procedure(instance, pair, cfg, streams=None):
    """Dispatch on the configuration type."""
    try:
        runner = _RUNNERS[type(cfg)]
    except KeyError:
        raise TypeError(f"not a procedure configuration: {cfg!r}") from None
    return runner(instance, pair, cfg, streams)


def classify_outcome(outcome, instance):
    """``(false positives, false negatives, exact)`` of an outcome against its instance."""
    if len(outcome.samples_per_index) != instance.n:
        raise MismatchedInstance(
            f"outcome covers {len(outcome.samples_per_index)} components, instance has {instance.n}"
        )
    est = np.asarray(outcome.estimated_support, dtype=np.int64)
    if est.size and (est.min() < 0 or est.max() >= instance.n):
        raise MismatchedInstance("estimated support has indices outside the instance")
    est_set = set(est.tolist())
    truth = set(instance.support)
    alpha_events = len(est_set - truth)
    beta_events = len(truth - est_set)
    return alpha_events, beta_events, alpha_events == 0 and beta_events == 0
