"""Sequential procedures for exact sparse support recovery.

Components of a length-``n`` signal follow a null distribution except for
``s`` of them, which follow an alternative. Procedures sample components
adaptively and return an estimate of which ``s`` are alternatives; the
harness measures how often that estimate is exactly right and what it cost.
"""

from .bounds import (
    BoundReport,
    Regime,
    classify_regime,
    cor2_schedule,
    nonseq_rate,
    seq_lower_bound,
    seq_rate,
    simple_st_budget,
    simple_st_passes,
    sprt_thresholds,
    st_cn,
    st_passes,
    st_step_samples,
)
from .config import parse_config
from .distributions import (
    BernoulliPair,
    DistributionPair,
    Family,
    GaussianShift,
    GeneralMLR,
    Hypothesis,
    LLRStats,
    llr,
    llr_stats,
    null_quantile,
    sample,
    test_statistic,
)
from .errors import (
    ConfigParseError,
    ConfigValidationError,
    DivergenceZero,
    MismatchedInstance,
    NonFiniteDivergence,
    NotPositive,
    QueryNotPermitted,
    ScheduleUnderflow,
    SeqSparseError,
    SparsityRegimeViolation,
    TrialError,
    UnsupportedFamily,
)
from .harness import (
    ExperimentFailure,
    ExperimentSpec,
    MonteCarloReport,
    fwer_oracle,
    run_experiment,
    sweep,
)
from .procedures import (
    FixedSample,
    GeneralST,
    ProblemInstance,
    RecoveryOutcome,
    SimpleST,
    Sprt,
    classify_outcome,
    run_fixed_sample,
    run_general_st,
    run_procedure,
    run_simple_st,
    run_sprt,
)
from .report import emit_report, read_results
from .streams import CounterStream, Substreams

__version__ = "0.1.0"
