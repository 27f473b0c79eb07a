"""Shared exception types."""


class InputError(ValueError):
    """Malformed or out-of-domain input (unknown identifiers, bad syntax, ...)."""


class PreconditionError(InputError):
    """An operation was called on arguments violating its precondition."""


class BoundExceeded(RuntimeError):
    """A configurable resource bound was hit before the computation finished."""

    def __init__(self, message: str, bound: int | None = None):
        super().__init__(message)
        self.bound = bound


class EngineDisagreement(RuntimeError):
    """The enumerative and fixed-point engines returned different verdicts."""
