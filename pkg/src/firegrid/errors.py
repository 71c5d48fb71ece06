"""Shared exception types."""


class FiregridError(Exception):
    """Base class for all package errors."""


class ValidationError(FiregridError, ValueError):
    """Input data violates a documented invariant (bad catalog, scenario, etc.)."""


class DomainError(FiregridError, ValueError):
    """Numeric operation called outside its domain (nonpositive term, nonburnable fuel)."""


class ContractError(FiregridError, RuntimeError):
    """API lifecycle misuse, e.g. stepping a finished episode."""


class ProtocolError(FiregridError, ValueError):
    """Malformed or out-of-sequence wire-protocol message."""


class SaturationError(FiregridError, RuntimeError):
    """A sampler exhausted its attempt budget before reaching the requested count."""

    def __init__(self, message: str, achieved: int, requested: int):
        super().__init__(message)
        self.achieved = achieved
        self.requested = requested
