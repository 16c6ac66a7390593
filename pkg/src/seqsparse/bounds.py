"""Closed-form sample-complexity bounds and parameter schedules.

Every function here is a pure evaluator of a stated formula. Logs are natural
(divergences are in nats) except where a base-2 log is named explicitly:
``log2`` appears only in the simple thresholding pass count and budget.
"""

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .errors import DivergenceZero, NotPositive, SparsityRegimeViolation


class Regime(str, enum.Enum):
    RELIABLE = "reliable"
    UNRELIABLE = "unreliable"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class BoundReport:
    """Where a sample budget sits relative to a bound.

    ``m_required`` is in samples per dimension; ``pe_floor`` is a lower bound
    on the family-wise error rate that applies when the budget does not
    exceed ``m_required`` (0 when nothing is implied).
    """

    m_required: float
    pe_floor: float
    regime: Regime
    inputs_echo: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.pe_floor <= 1.0:
            raise ValueError(f"pe_floor {self.pe_floor} outside [0, 1]")
        if not self.m_required >= 0.0:
            raise ValueError(f"m_required {self.m_required} is negative")


class SprtThresholds(NamedTuple):
    gamma_L: float
    gamma_U: float
    log_gamma_L: float
    log_gamma_U: float


class CnReport(NamedTuple):
    c_n: float
    c_n_prime: float
    m_sufficient: float


class Cor2Schedule(NamedTuple):
    delta: float
    rho: float
    K: int


def _stats_echo(stats):
    return {"d01": stats.d01, "d10": stats.d10, "var01": stats.var01}


def ceil_log(x, base):
    """Smallest integer ``k`` with ``base**k >= x``, immune to log round-off."""
    if x <= 1:
        return 0
    k = math.ceil(math.log(x) / math.log(base))
    while k > 0 and base ** (k - 1) >= x:
        k -= 1
    while base**k < x:
        k += 1
    return k


# -- lower bounds ------------------------------------------------------------


def seq_lower_bound(s, delta, stats, m=None):
    """Finite-sample limit for any coordinate-wise sequential procedure.

    A budget ``m <= (ln s + ln(1/(4 delta))) / D_KL`` forces
    ``P_e >= 1 - exp(-delta)``. If ``m`` is given the report classifies it as
    unreliable under that condition and indeterminate otherwise.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    dkl = stats.dkl
    if dkl <= 0:
        raise DivergenceZero("D_KL is zero; no finite budget separates the hypotheses")
    m_required = max(0.0, (math.log(s) + math.log(1.0 / (4.0 * delta))) / dkl)
    pe_floor = -math.expm1(-delta)
    if m is None:
        regime = Regime.INDETERMINATE
    else:
        regime = Regime.UNRELIABLE if m <= m_required else Regime.INDETERMINATE
    echo = {"s": s, "delta": delta, "m": m, **_stats_echo(stats)}
    return BoundReport(m_required=m_required, pe_floor=pe_floor, regime=regime, inputs_echo=echo)


def seq_rate(s, stats):
    """Asymptotic per-dimension rate ``ln(s) / D(P0||P1)`` for sequential recovery."""
    if s < 1:
        raise ValueError("s must be >= 1")
    if stats.d01 <= 0:
        raise DivergenceZero("D(P0||P1) is zero")
    return math.log(s) / stats.d01


def nonseq_rate(n, stats):
    """Asymptotic per-dimension rate ``ln(n) / D(P1||P0)`` for fixed-sample recovery."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if stats.d10 <= 0:
        raise DivergenceZero("D(P1||P0) is zero")
    return math.log(n) / stats.d10


def classify_regime(m, n, s, stats, sequential=True, divergence=None):
    """Place a per-dimension budget ``m`` against the asymptotic rates.

    Sequential procedures are judged against ``ln s / D``, where ``D`` is
    ``d01`` for sparse problems (``s / n <= 0.01``) and ``D_KL`` otherwise
    unless ``divergence`` (``"d01"`` or ``"dkl"``) says which. Fixed-sample
    procedures are judged against ``ln n / d10``. At or below the rate the
    budget is unreliable, above it reliable; degenerate inputs (``s == 1``,
    zero divergence, undefined ``m``) are indeterminate.
    """
    if m is None or not math.isfinite(m):
        return Regime.INDETERMINATE
    try:
        if sequential:
            if s < 2:
                return Regime.INDETERMINATE
            if divergence is None:
                divergence = "d01" if s / n <= 0.01 else "dkl"
            d = stats.d01 if divergence == "d01" else stats.dkl
            if d <= 0:
                return Regime.INDETERMINATE
            rate = math.log(s) / d
        else:
            rate = nonseq_rate(n, stats)
    except DivergenceZero:
        return Regime.INDETERMINATE
    return Regime.UNRELIABLE if m <= rate else Regime.RELIABLE


def regime_report(m, n, s, stats, sequential=True, delta=0.1):
    """BoundReport positioning an experiment's budget for the harness."""
    regime = classify_regime(m, n, s, stats, sequential=sequential)
    try:
        rate = seq_rate(s, stats) if sequential else nonseq_rate(n, stats)
        lb = seq_lower_bound(s, delta, stats, m=m)
        pe_floor = lb.pe_floor if lb.regime is Regime.UNRELIABLE else 0.0
    except (DivergenceZero, ValueError):
        rate, pe_floor = 0.0, 0.0
    echo = {"n": n, "s": s, "m": m, "delta": delta, "sequential": sequential, **_stats_echo(stats)}
    return BoundReport(m_required=rate, pe_floor=pe_floor, regime=regime, inputs_echo=echo)


# -- achievability -----------------------------------------------------------


def sprt_thresholds(n, s, epsilon):
    """Likelihood-ratio thresholds ``s**-(1+eps)`` and ``(n-s)**(1+eps)``."""
    if n - s < 1:
        raise ValueError("need at least one null component (n - s >= 1)")
    if s < 1:
        raise ValueError("s must be >= 1")
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    log_l = -(1.0 + epsilon) * math.log(s)
    log_u = (1.0 + epsilon) * math.log(n - s)
    return SprtThresholds(math.exp(log_l), math.exp(log_u), log_l, log_u)


def simple_st_passes(n, delta):
    """Number of passes ``ceil(log2(2n / delta))`` of simple thresholding."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return ceil_log(2.0 * n / delta, 2)


def simple_st_budget(n, s, delta, theta):
    """Sufficient budget for simple thresholding on ``N(0,1)`` vs ``N(theta,1)``.

    Returns ``(ln s + ln log2(2n/delta) + ln(1/delta)) / (theta**2 / 4)``;
    the guarantee needs ``m`` strictly above this value.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not theta > 0:
        raise ValueError("theta must be > 0")
    num = math.log(s) + math.log(math.log2(2.0 * n / delta)) + math.log(1.0 / delta)
    return num / (theta**2 / 4.0)


def even_budget_above(x):
    """Smallest even integer strictly greater than ``x`` (and at least 2)."""
    m = 2 * (math.floor(x / 2.0) + 1)
    return max(m, 2)


def st_passes(n, s, delta, rho):
    """Step count ``ceil(log_{1/(1-rho)}(2(n-s)/delta))`` of Sequential Thresholding."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    return ceil_log(2.0 * (n - s) / delta, 1.0 / (1.0 - rho))


def st_step_samples(m, k, rho, n, s, K):
    """Samples per surviving component on step ``k``:
    ``floor(m k rho^2 n / (n + s K^2))`` in exact rational arithmetic."""
    r = Fraction(rho)
    return math.floor(Fraction(m) * k * r * r * n / (n + s * K * K))


def st_cn(n, s, m, rho, K, stats, delta=None):
    """Finite-sample rate constant of Sequential Thresholding.

    ``c_n`` uses the sparsity-driven inner term ``rho^2 n ln s / (d01 (n + s K^2)) - 1``;
    ``c_n_prime`` is the same expression with the budget ``m`` in place of
    ``ln s / d01``. When ``delta`` is given, ``m_sufficient`` is
    ``(ln s + ln(1/delta) + ln 4) / c_n``; otherwise it is NaN.

    Raises :class:`NotPositive` if ``c_n`` is not positive, including when the
    square-root argument is undefined.
    """
    d01, var01 = stats.d01, stats.var01
    if d01 <= 0:
        raise NotPositive("c_n needs D(P0||P1) > 0")
    scale = rho**2 * n / (n + s * K**2)

    def constant(inner):
        if var01 == 0:
            return scale * d01
        if inner <= 0:
            return -math.inf
        return scale * (d01 - math.sqrt(var01 / (inner * (1.0 - rho))))

    c_n = constant(scale * math.log(s) / d01 - 1.0)
    if not c_n > 0:
        raise NotPositive(f"c_n = {c_n} is not positive for n={n}, s={s}, rho={rho}, K={K}")
    c_n_prime = constant(scale * m - 1.0)
    m_sufficient = math.nan
    if delta is not None:
        m_sufficient = (math.log(s) + math.log(1.0 / delta) + math.log(4.0)) / c_n
    return CnReport(c_n=c_n, c_n_prime=c_n_prime, m_sufficient=m_sufficient)


def cor2_schedule(n, s):
    """Asymptotically optimal inputs ``delta = 1/ln s``, ``rho = 1 - 1/sqrt(ln s)``.

    Requires ``ln s >= 4`` so that ``rho >= 1/2``, and ``s < n / (ln n)^2``.
    """
    if s < 3:
        raise SparsityRegimeViolation(f"s={s} < 3 leaves delta = 1/ln s >= 1")
    ln_s = math.log(s)
    delta = 1.0 / ln_s
    rho = 1.0 - 1.0 / math.sqrt(ln_s)
    if rho < 0.5:
        raise SparsityRegimeViolation(
            f"s={s} gives rho={rho:.6f} < 1/2; the schedule needs ln s >= 4 (s >= 55)"
        )
    if s >= n / math.log(n) ** 2:
        raise SparsityRegimeViolation(f"s={s} is not below n/(ln n)^2 = {n / math.log(n) ** 2:.6g}")
    return Cor2Schedule(delta=delta, rho=rho, K=st_passes(n, s, delta, rho))
