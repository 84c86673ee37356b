"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ValidationError -> 2,
NumericDegeneracyError -> 3, OSError -> 4.
"""


class DynconnError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(DynconnError):
    """Bad inputs: parameter constraints, dimension mismatches, degenerate data."""


class HorizonOverflowError(ValidationError):
    """Stimulus design does not fit inside the scan horizon."""


class DegenerateSeriesError(ValidationError):
    """A series is constant where variation is required."""


class InsufficientSamplesError(ValidationError):
    """Too few posterior draws for the requested summary."""


class NumericDegeneracyError(DynconnError):
    """A covariance factorization failed even after the jitter retry."""
