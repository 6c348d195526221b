"""Exception and warning types raised across skewlab."""


class SkewLabError(Exception):
    """Base class for every error raised by the library."""


class ValidationError(SkewLabError, ValueError):
    """Input rejected before any computation ran."""


class DegreeMismatch(ValidationError):
    pass


class InsufficientSamples(ValidationError):
    pass


class BadRoot(ValidationError):
    """Chain root is zero or divisible by the degree."""


class NonRational(ValidationError):
    pass


class OverflowBudget(SkewLabError):
    """An enumeration would exceed the configured point budget."""


class BudgetExhausted(SkewLabError):
    pass


class RateUnavailable(SkewLabError):
    """Too few resolvable correlation values to fit a decay rate."""


class ConeViolation(SkewLabError):
    pass


class JacobianError(SkewLabError):
    pass


class InconsistentEvidence(SkewLabError):
    """Criteria that must agree mathematically returned different verdicts."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NonDerivativeInput(UserWarning):
    """Twisted solver received an input with nonzero mean."""
