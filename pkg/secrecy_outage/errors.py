"""
Exception types raised by the secrecy outage toolkit.
"""

from typing import List, Optional


class SecrecyOutageError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(SecrecyOutageError, ValueError):
    """
    Raised when a parameter set violates one or more constraints.

    The full list of violations is kept so callers can report all of them
    at once instead of fixing one field at a time.
    """

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid parameters")


class DomainError(SecrecyOutageError, ValueError):
    """Raised when a function is evaluated outside its domain."""


class NoConvergence(SecrecyOutageError, RuntimeError):
    """
    Raised when adaptive quadrature misses its tolerance.

    Attributes:
        estimate: Best estimate reached before giving up
        error: Error bound reported for that estimate
    """

    def __init__(self, message: str, estimate: float = float('nan'),
                 error: float = float('inf')):
        self.estimate = estimate
        self.error = error
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")


class EmptyInput(SecrecyOutageError, ValueError):
    """Raised when an operation needs at least one element."""


class NoSignChange(SecrecyOutageError, ValueError):
    """Raised when a bracket does not enclose a crossover."""

    def __init__(self, message: str, lo_diff: Optional[float] = None,
                 hi_diff: Optional[float] = None):
        self.lo_diff = lo_diff
        self.hi_diff = hi_diff
        super().__init__(message)


class InsufficientPoints(SecrecyOutageError, ValueError):
    """Raised when a trend check gets fewer than three points."""
