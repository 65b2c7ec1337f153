# -*- coding: utf-8 -*-
"""
    errors.py
    ~~~~~~~~~~~~~~~~~~~~~~
    Exception hierarchy shared by every fairorder module. Validation-type failures
    subclass ValueError so callers that only know the builtin still catch them.
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"


class FairOrderError(Exception):
    """Base class for all errors raised by fairorder."""


class ConfigError(FairOrderError, ValueError):
    """A configuration violates a module precondition.

    :param problems: every violated field, so the CLI can report them at once
    """

    def __init__(self, problems: list[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DatasetError(FairOrderError, ValueError):
    """Problem with tabular input data. Carries an optional row/column location."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column '{column}'")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class MissingColumnError(DatasetError):
    pass


class NonBinaryValueError(DatasetError):
    pass


class NonNumericCellError(DatasetError):
    pass


class EmptyDatasetError(DatasetError):
    pass


class SplitError(DatasetError):
    pass


class ShapeMismatchError(FairOrderError, ValueError):
    """Input width does not match a layer of the network."""

    def __init__(self, layer: int, expected: int, got: int):
        self.layer = layer
        self.expected = expected
        self.got = got
        super().__init__(f"layer {layer} expects input dim {expected}, got {got}")


class OrderError(FairOrderError, ValueError):
    """A data order or batch request cannot be satisfied."""


class UndefinedMetricError(FairOrderError, ArithmeticError):
    """A fairness/performance metric has a zero denominator on this input."""


class UndefinedCorrelationError(FairOrderError, ArithmeticError):
    """Pearson correlation requested on a zero-variance vector."""


class InsufficientSamplesError(FairOrderError, ValueError):
    """A statistic needs more values than were supplied."""
