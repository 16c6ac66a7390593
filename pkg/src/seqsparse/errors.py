"""Exception types raised across the package."""


class SeqSparseError(Exception):
    """Base class for all package errors."""


class QueryNotPermitted(SeqSparseError):
    """A procedure asked for the pointwise LLR of a pair whose alternative is hidden."""


class NonFiniteDivergence(SeqSparseError, ArithmeticError):
    pass


class UnsupportedFamily(SeqSparseError, TypeError):
    pass


class ScheduleUnderflow(SeqSparseError, ValueError):
    """Sequential Thresholding would take zero samples on its first step."""


class MismatchedInstance(SeqSparseError, ValueError):
    pass


class DivergenceZero(SeqSparseError, ZeroDivisionError):
    pass


class NotPositive(SeqSparseError, ValueError):
    """The finite-sample constant of the Sequential Thresholding bound is not positive."""


class SparsityRegimeViolation(SeqSparseError, ValueError):
    pass


class TrialError(SeqSparseError):
    """A Monte Carlo trial failed; carries the trial index and its seed."""

    def __init__(self, message, trial, seed):
        super().__init__(message)
        self.trial = trial
        self.seed = seed


class ConfigParseError(SeqSparseError, ValueError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field


class ConfigValidationError(SeqSparseError, ValueError):
    pass
