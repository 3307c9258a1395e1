"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for bad inputs
(CLI exit code 2) and :class:`NumericError` for numerical breakdowns
(CLI exit code 3).
"""


class SalsaError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SalsaError, ValueError):
    pass


class NumericError(SalsaError, ArithmeticError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


class NotSymmetric(ValidationError):
    pass


class OrderExceedsDimension(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class BadSubset(ValidationError):
    pass


class TooFewRows(ValidationError):
    pass


class EmptyGrid(ValidationError):
    pass


class Empty(ValidationError):
    pass


class LambdaNonPositive(ValidationError):
    pass


class MissingTarget(ValidationError):
    pass


class EmptyFile(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, row, col, message):
        self.row = row
        self.col = col
        super().__init__(f"row {row}, column {col}: {message}")


class DegenerateColumn(ValidationError):
    """Raised for constant feature columns; ``columns`` lists their indices."""

    def __init__(self, columns, names=None):
        self.columns = list(columns)
        shown = names if names is not None else self.columns
        super().__init__(f"constant (zero-variance) feature column(s): {list(shown)}")


class NotFactorizable(NumericError):
    pass


class NoConvergence(NumericError):
    pass


class TailNotConvergent(NumericError):
    pass


class SecularNoRoot(NumericError):
    pass


class MaxIterations(NumericError):
    pass
