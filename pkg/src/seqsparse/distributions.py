"""Null/alternative distribution pairs.

A pair supplies what the recovery procedures consume: i.i.d. sampling (via a
uniform-to-observation transform so that counter-based streams can drive it),
the pointwise log-likelihood ratio, KL divergences and LLR variance, and the
null quantiles of a scalar statistic that is monotone in the LLR.

Three families are provided:

* :class:`GaussianShift` -- ``N(0, 1)`` against ``N(theta, 1)``;
* :class:`BernoulliPair` -- ``Bernoulli(p0)`` against ``Bernoulli(p1)``;
* :class:`GeneralMLR` -- any two ``scipy.stats`` frozen distributions plus a
  monotone statistic, with Monte Carlo divergences and empirical quantiles.

All divergences are in nats.
"""

import dataclasses
import enum
import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special, stats

from .errors import NonFiniteDivergence, QueryNotPermitted
from .streams import CounterStream


class Hypothesis(str, enum.Enum):
    NULL = "null"
    ALT = "alt"


class Family(str, enum.Enum):
    GAUSSIAN_SHIFT = "gaussian"
    BERNOULLI_PAIR = "bernoulli"
    GENERAL_MLR = "general"


@dataclass(frozen=True)
class LLRStats:
    """Divergences between the pair, in nats.

    ``var01`` is the variance of the single-sample LLR under the null.
    """

    d01: float
    d10: float
    var01: float

    @property
    def dkl(self):
        return max(self.d01, self.d10)


def _is_alt(hypothesis):
    return Hypothesis(hypothesis) is Hypothesis.ALT


class DistributionPair:
    """Common interface; concrete families are frozen dataclasses that
    override the hooks below and carry an ``alt_known`` field."""

    alt_known = True
    kind = None
    # spacing below which null_quantile makes no promise (probability units
    # for empirical quantiles, statistic units for lattice families)
    quantile_resolution = 0.0

    # -- hooks -------------------------------------------------------------
    def transform(self, u, alt):
        """Map uniforms to observations; ``alt`` broadcasts against rows of ``u``."""
        raise NotImplementedError

    def _llr_increments(self, y):
        raise NotImplementedError

    def _llr_stats(self):
        raise NotImplementedError

    def test_statistic(self, observations):
        """Monotone sufficient statistic over the last axis (sum by default)."""
        return np.sum(np.asarray(observations, dtype=float), axis=-1)

    def null_quantile(self, sample_count, rho):
        raise NotImplementedError

    # -- shared behaviour --------------------------------------------------
    def sample(self, hypothesis, count, rng):
        if count < 1:
            raise ValueError("count must be >= 1")
        u = rng.random(count)
        return self.transform(u, _is_alt(hypothesis))

    def llr_increments(self, observations):
        """Per-observation log-likelihood ratios ``log P1(y) / P0(y)``."""
        if not self.alt_known:
            raise QueryNotPermitted(
                f"{type(self).__name__} was built with alt_known=False; "
                "only test_statistic and null_quantile are available"
            )
        return self._llr_increments(np.asarray(observations))

    def llr(self, observations):
        """Log-likelihood ratio of a sample sequence (sum over the last axis)."""
        inc = self.llr_increments(observations)
        total = np.sum(inc, axis=-1)
        return float(total) if np.ndim(total) == 0 else total

    def llr_stats(self):
        st = self._llr_stats()
        if not all(math.isfinite(v) for v in (st.d01, st.d10, st.var01)):
            raise NonFiniteDivergence(f"{self!r} has non-finite divergence: {st}")
        return st

    def with_alt_known(self, alt_known):
        return dataclasses.replace(self, alt_known=alt_known)

    @staticmethod
    def _check_rho(sample_count, rho):
        if int(sample_count) != sample_count or sample_count < 1:
            raise ValueError(f"sample_count must be a positive integer, got {sample_count}")
        if not 0.0 < rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {rho}")


@dataclass(frozen=True)
class GaussianShift(DistributionPair):
    """``P0 = N(0, 1)``, ``P1 = N(theta, 1)`` with ``theta > 0``."""

    theta: float = 1.0
    alt_known: bool = True

    kind = Family.GAUSSIAN_SHIFT

    def __post_init__(self):
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise ValueError(f"GaussianShift needs theta > 0, got {self.theta}")

    def transform(self, u, alt):
        z = special.ndtri(u)
        alt = np.asarray(alt)
        if alt.ndim == 0:
            return z + self.theta if alt else z
        shift = np.where(alt, self.theta, 0.0)
        if z.ndim == 2:
            shift = shift[:, None]
        return z + shift

    def _llr_increments(self, y):
        return self.theta * y - 0.5 * self.theta**2

    def _llr_stats(self):
        d = 0.5 * self.theta**2
        return LLRStats(d01=d, d10=d, var01=self.theta**2)

    def null_quantile(self, sample_count, rho):
        self._check_rho(sample_count, rho)
        # exact: the null sum is N(0, sample_count)
        return math.sqrt(sample_count) * float(special.ndtri(rho))


@dataclass(frozen=True)
class BernoulliPair(DistributionPair):
    """``P0 = Bernoulli(p0)``, ``P1 = Bernoulli(p1)``.

    Degenerate masses (0 or 1) and ``p0 == p1`` are accepted; the former make
    the divergences infinite (``llr_stats`` raises), the latter zero.
    """

    p0: float = 0.5
    p1: float = 0.5
    alt_known: bool = True

    kind = Family.BERNOULLI_PAIR
    quantile_resolution = 1.0

    def __post_init__(self):
        for name in ("p0", "p1"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")

    def transform(self, u, alt):
        alt = np.asarray(alt)
        if alt.ndim == 0:
            p = self.p1 if alt else self.p0
        else:
            p = np.where(alt, self.p1, self.p0)
            if np.ndim(u) == 2:
                p = p[:, None]
        return (u < p).astype(np.int64)

    def _llr_increments(self, y):
        with np.errstate(divide="ignore"):
            one = np.log(self.p1) - np.log(self.p0)
            zero = np.log1p(-self.p1) - np.log1p(-self.p0)
        if self.p0 == self.p1:
            one = zero = 0.0
        return np.where(y == 1, one, zero)

    def _llr_stats(self):
        p0, p1 = self.p0, self.p1
        d01 = float(special.rel_entr(p0, p1) + special.rel_entr(1 - p0, 1 - p1))
        d10 = float(special.rel_entr(p1, p0) + special.rel_entr(1 - p1, 1 - p0))
        if p0 == p1:
            return LLRStats(d01=0.0, d10=0.0, var01=0.0)
        with np.errstate(divide="ignore"):
            one = float(np.log(p1) - np.log(p0))
            zero = float(np.log1p(-p1) - np.log1p(-p0))
        if p0 in (0.0, 1.0):
            # the null LLR is a constant
            var01 = 0.0 if math.isfinite(one if p0 == 1.0 else zero) else math.inf
        else:
            var01 = p0 * (1 - p0) * (one - zero) ** 2
        return LLRStats(d01=d01, d10=d10, var01=var01)

    def test_statistic(self, observations):
        return np.sum(np.asarray(observations), axis=-1)

    def null_quantile(self, sample_count, rho):
        self._check_rho(sample_count, rho)
        return _binomial_quantile(int(sample_count), self.p0, rho)


def _binomial_quantile(count, p, rho):
    """Smallest integer ``g`` with ``P(Binomial(count, p) <= g) >= rho``."""
    if count <= 64:
        # exact rational CDF on the shortest decimal reading of the inputs, so
        # ties such as p=0.1, rho=0.9 resolve to the smaller g
        fp = Fraction(repr(float(p)))
        fq = 1 - fp
        target = Fraction(repr(float(rho)))
        cdf = Fraction(0)
        for g in range(count + 1):
            cdf += math.comb(count, g) * fp**g * fq ** (count - g)
            if cdf >= target:
                return g
        return count
    cdf = stats.binom.cdf(np.arange(count + 1), count, p)
    hit = np.nonzero(cdf >= rho * (1.0 - 1e-12))[0]
    return int(hit[0]) if hit.size else count


@dataclass(frozen=True, eq=False)
class GeneralMLR(DistributionPair):
    """Escape hatch for any pair with a monotone likelihood ratio statistic.

    ``null`` and ``alt`` are frozen ``scipy.stats`` distributions (their
    ``ppf`` drives sampling, their ``logpdf``/``logpmf`` the LLR). The
    ``statistic`` maps an ``(..., ell)`` array of observations to an ``(...)``
    array and must be strictly increasing in the LLR; it defaults to the sum.

    Divergences are Monte Carlo estimates from ``mc_samples`` draws per
    hypothesis, and ``null_quantile`` is the empirical quantile of
    ``mc_samples`` simulated null statistics, both seeded by ``mc_seed``. The
    empirical quantile is accurate to about ``1 / sqrt(mc_samples)`` in
    probability; ``quantile_resolution`` reports ``1 / mc_samples``.
    """

    null: object = None
    alt: object = None
    statistic: object = None
    alt_known: bool = True
    mc_samples: int = 200_000
    mc_seed: int = 0x6E6C

    kind = Family.GENERAL_MLR

    def __post_init__(self):
        if self.null is None or self.alt is None:
            raise ValueError("GeneralMLR needs both null and alt distributions")
        if self.mc_samples < 1000:
            raise ValueError("mc_samples below 1000 gives useless quantiles")

    @property
    def quantile_resolution(self):
        return 1.0 / self.mc_samples

    def transform(self, u, alt):
        alt = np.asarray(alt)
        if alt.ndim == 0:
            return (self.alt if alt else self.null).ppf(u)
        out = self.null.ppf(u)
        rows = np.nonzero(alt)[0]
        if rows.size:
            out[rows] = self.alt.ppf(u[rows])
        return out

    @staticmethod
    def _logdensity(dist, y):
        if isinstance(dist.dist, stats.rv_discrete):
            return dist.logpmf(y)
        return dist.logpdf(y)

    def _llr_increments(self, y):
        return self._logdensity(self.alt, y) - self._logdensity(self.null, y)

    def _llr_stats(self):
        stream = CounterStream(self.mc_seed, 1)
        y0 = self.transform(stream.random(self.mc_samples), False)
        y1 = self.transform(stream.random(self.mc_samples), True)
        with np.errstate(all="ignore"):
            l0 = self._llr_increments(y0)
            l1 = self._llr_increments(y1)
        return LLRStats(d01=float(-np.mean(l0)), d10=float(np.mean(l1)), var01=float(np.var(l0)))

    def test_statistic(self, observations):
        observations = np.asarray(observations, dtype=float)
        if self.statistic is None:
            return np.sum(observations, axis=-1)
        return self.statistic(observations)

    def null_quantile(self, sample_count, rho):
        self._check_rho(sample_count, rho)
        return _empirical_null_quantile(self, int(sample_count), float(rho))


@functools.lru_cache(maxsize=256)
def _empirical_null_quantile(pair, sample_count, rho):
    stream = CounterStream(pair.mc_seed, 2, sample_count)
    u = stream.random((pair.mc_samples, sample_count))
    t = np.sort(pair.test_statistic(pair.transform(u, False)))
    # min{g : F_hat(g) >= rho}
    k = math.ceil(rho * pair.mc_samples) - 1
    return float(t[max(k, 0)])


# -- functional API ----------------------------------------------------------


def sample(pair, hypothesis, count, rng):
    """``count`` i.i.d. draws from P0 (``"null"``) or P1 (``"alt"``).

    ``rng`` is anything with a numpy-style ``random(size)`` method, e.g. a
    :class:`numpy.random.Generator` or a :class:`~seqsparse.streams.CounterStream`.
    """
    return pair.sample(hypothesis, count, rng)


def llr(pair, observations):
    return pair.llr(observations)


def llr_stats(pair):
    return pair.llr_stats()


def test_statistic(pair, observations):
    return pair.test_statistic(observations)


test_statistic.__test__ = False  # keep pytest from collecting the re-export


def null_quantile(pair, sample_count, rho):
    return pair.null_quantile(sample_count, rho)
