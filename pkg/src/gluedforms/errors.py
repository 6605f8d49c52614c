"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class GluedFormsError(Exception):
    """Base class for all library errors."""


class ScalarModeError(GluedFormsError):
    """Exact and floating-point scalars were mixed in one operation."""


class EvaluationError(GluedFormsError):
    """An expression could not be evaluated (pole, overflow, domain error)."""


class DimensionMismatchError(GluedFormsError):
    """Operands have incompatible dimensions."""


class NotPolynomialError(GluedFormsError):
    """The expression lies outside the exactly-canonicalizable fragment."""


class ExprParseError(GluedFormsError):
    """Problem while parsing an expression; ``offset`` is a byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ExprSyntaxError(ExprParseError):
    pass


class UnknownIdentifierError(ExprParseError):
    pass


class VariableIndexError(ExprParseError):
    pass


class SpaceValidationError(GluedFormsError):
    """Space construction data violates an invariant (non-affine map, bad inverse, ...)."""


class IncompatibleFormsError(GluedFormsError):
    """The two forms fail the gluing compatibility test.

    ``difference`` carries the pulled-back mismatch for diagnosis.
    """

    def __init__(self, message: str, difference=None):
        super().__init__(message)
        self.difference = difference


class DomainError(GluedFormsError):
    """A projection was applied outside its domain of definition."""


class FibreMembershipError(GluedFormsError):
    """An element does not satisfy the fibre's compatibility constraints."""


class MetricRankError(GluedFormsError):
    """A piece metric failed the full-rank check."""


class SceneError(GluedFormsError):
    """Problem in a scene file; carries the 1-based line and column.

    Line 0 means the error has no file position (e.g. name resolution
    from the command line).
    """

    def __init__(self, message: str, line: int = 0, column: int = 1):
        if line > 0:
            super().__init__(f"line {line}, column {column}: {message}")
        else:
            super().__init__(message)
        self.line = line
        self.column = column
