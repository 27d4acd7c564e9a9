"""Exception hierarchy shared by all lexmap modules."""


class LexmapError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(LexmapError):
    """A file row could not be parsed; the message names the line."""


class FormatError(LexmapError):
    """A file violates its declared format (bad header, wrong field count)."""


class ValidationError(LexmapError):
    """Inputs violate a documented precondition or invariant."""


class SolverError(LexmapError):
    """A linear solve failed even after the fallback path."""


class DivergenceError(SolverError):
    """Incremental learning produced a non-finite update; carries the step."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite update at learning event {step}")
