"""Exception types shared across the package.

Every raised condition maps to one of these so callers can distinguish bad
input (validation, domain, config) from numerical failure (breakdown,
accuracy) without string matching.
"""


class ThermochainError(Exception):
    """Base class for all package errors."""


class ValidationError(ThermochainError, ValueError):
    """Input violates a documented precondition or invariant."""


class ConfigError(ValidationError):
    """Config file problem; message carries the offending key path."""

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(message if key is None else f"{key}: {message}")


class DomainError(ValidationError):
    """Argument outside the mathematical domain of an operation."""


class SingularityError(DomainError):
    """Evaluation requested exactly at a non-removable singularity."""


class StatisticsMismatchError(ValidationError):
    """Bosonic quantity requested from fermionic data or vice versa."""


class EmptyMeasureError(ValidationError):
    """Discretized measure carries no weight (all couplings zero)."""


class BreakdownError(ThermochainError):
    """Recurrence/orthogonalization broke down; ``index`` locates the step."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        super().__init__(message if index is None else f"{message} (index {index})")


class AccuracyError(ThermochainError):
    """A computation finished but failed its internal accuracy gate."""


class DimensionCapError(ValidationError):
    """Requested Hilbert space exceeds the configured size cap."""


class NumericalError(ThermochainError):
    """A linear-algebra kernel failed (e.g. SVD non-convergence)."""
