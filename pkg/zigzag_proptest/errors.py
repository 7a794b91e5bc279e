"""
Exception hierarchy.

Everything raised on purpose is a ValueError, so callers that only know
about bad input can keep catching that. Validators never raise for a
violated property; they return a ValidationReport instead.
"""

from typing import Optional


class ProptestError(ValueError):
    """Base class for all library errors."""


class FormatError(ProptestError):
    """A text file does not follow its declared format."""

    def __init__(self, message: str, *, line: Optional[int] = None, source: str = "<input>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


class InvalidRotmap(ProptestError):
    """A rotation map is not total or not self-inverse."""


class DimensionMismatch(ProptestError):
    """Operands do not fit together (zig-zag sizes, signatures, radii)."""


class CapExceeded(ProptestError):
    """A materialization or enumeration would exceed its configured cap."""


class BudgetExceeded(ProptestError):
    """A search or evaluation ran out of its step budget."""


class PatternMismatch(ProptestError):
    """A graph is not in the image shape of the reduction."""

    def __init__(self, message: str, *, vertex: Optional[int] = None):
        self.vertex = vertex
        suffix = f" (vertex {vertex})" if vertex is not None else ""
        super().__init__(f"{message}{suffix}")


class FormulaSyntaxError(ProptestError):
    """The s-expression text of a formula is malformed."""

    def __init__(self, message: str, *, position: int):
        self.position = position
        super().__init__(f"at position {position}: {message}")


class UnboundVariable(ProptestError):
    """A free variable has no value in the assignment."""


class PreconditionError(ProptestError):
    """An operation was called outside its documented domain."""


class ConsistencyError(ProptestError):
    """Two independent computations of the same quantity disagree."""
