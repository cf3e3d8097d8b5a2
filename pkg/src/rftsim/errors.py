"""Shared exception types."""

from __future__ import annotations


class ToolError(Exception):
    """Base class for all rftsim errors."""


class ParseError(ToolError):
    """Syntax error with source location.

    Attributes:
        line, col: 1-based position of the offending token.
        expected: tokens that would have been accepted at this point.
    """

    def __init__(self, message, line=None, col=None, expected=()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        loc = f"{line}:{col}: " if line is not None else ""
        hint = ""
        if self.expected:
            hint = " (expected " + " or ".join(self.expected) + ")"
        super().__init__(f"{loc}{message}{hint}")


class ModelError(ToolError):
    """Semantic error in a model (bad range, unknown label, bad wiring)."""


class RangeOverflow(ModelError):
    """An assignment left the declared range of a variable."""

    def __init__(self, message, valuation=None):
        self.valuation = valuation
        if valuation:
            message = f"{message} [at {valuation}]"
        super().__init__(message)


class UnknownLabel(ModelError):
    """An action label is not registered in the model alphabet."""


class IncompatibleComponents(ModelError):
    """Parallel composition preconditions violated."""


class UnsupportedArity(ModelError):
    """A tree element has an arity the compiler cannot instantiate."""


class Deadlock(ToolError):
    """Simulation reached a state with no enabled action and no active clock."""

    def __init__(self, message, state_dump=""):
        self.state_dump = state_dump
        super().__init__(message + ("\n" + state_dump if state_dump else ""))


class UrgentLivelock(ToolError):
    """An urgent cascade exceeded its firing bound without time advancing."""
