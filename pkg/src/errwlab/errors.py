"""Package exception types."""

from __future__ import annotations


class ErrwLabError(Exception):
    """Base class for errors raised by this package."""


class SchemaError(ErrwLabError, ValueError):
    """Configuration rejected; carries the full list of problems found."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class SummabilityError(ErrwLabError, ValueError):
    """An operation needed a convergent reciprocal-weight series and the
    weight family cannot certify one."""


class TailTruncationError(ErrwLabError, RuntimeError):
    """A certified truncation exists but exceeds the term budget."""

    def __init__(self, message: str, required_terms: int):
        self.required_terms = required_terms
        super().__init__(message)


class ClockUnderflowError(ErrwLabError, FloatingPointError):
    """A clock gap scale underflowed to zero; the run cannot continue honestly."""


class InsufficientSampleError(ErrwLabError, ValueError):
    """A diagnostic needed states covering every vertex and did not get them."""
