"""Exception and warning taxonomy for the explanation engine.

Every error raised by the library derives from GamxError so callers can
catch the whole family.  PrecisionWarning is a Warning, not an error: lossy
quantized answers are returned with certified bounds rather than refused.
"""


class GamxError(Exception):
    """Base class for all library errors."""


class ParseError(GamxError):
    """A document is structurally malformed (bad JSON, missing/ill-typed fields)."""


class ValidationError(GamxError):
    """A structural invariant of a parsed object is violated."""


class DomainError(GamxError):
    """A value lies outside the feature domain it was used with."""


class UnsupportedTaskError(GamxError):
    """The query is not defined for the model's task (regression vs classification)."""


class UnsupportedDistributionError(GamxError):
    """The distribution variant cannot be handled exactly for this domain."""


class BudgetExceededError(GamxError):
    """Piecewise canonicalization passed its piece budget.

    Carries ``pieces``, the count reached when the budget tripped.  Raised
    instead of silently truncating: callers can discretize the domain or
    fall back to the brute-force oracle.
    """

    def __init__(self, message: str, pieces: int):
        super().__init__(message)
        self.pieces = pieces


class NoContrastiveReasonError(GamxError):
    """The model is constant at the instance's prediction; nothing can flip it."""


class QuantizationOverflowError(GamxError):
    """A quantized weight exceeds the configured integer capacity."""


class PrecisionError(GamxError):
    """Quantization was lossy where an exact answer was required."""


class StateSpaceTooLargeError(GamxError):
    """The oracle's exhaustive state space exceeds the configured ceiling."""


class PrecisionWarning(Warning):
    """A lossy-quantization answer was returned with certified bounds."""
