"""Exception hierarchy.

Every error raised on purpose by the package derives from ``MlrSelectError``.
The CLI maps ``InputError`` subclasses to exit code 2 and everything else to
exit code 3.
"""

from __future__ import annotations


class MlrSelectError(ValueError):
    """Base class for all package errors."""


class InputError(MlrSelectError):
    """Malformed user input (files, shapes, flags)."""


class ParseError(InputError):
    """A CSV cell could not be read as a finite number."""

    def __init__(self, message: str, path: str | None = None,
                 row: int | None = None, column: int | None = None):
        self.path = path
        self.row = row
        self.column = column
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class RowMismatch(InputError):
    """Y and X do not have the same number of rows."""


class NonFinite(MlrSelectError):
    """A data matrix contains NaN or Inf."""


class DimensionRegime(MlrSelectError):
    """The working regime n - k > p is violated."""


class RankDeficient(MlrSelectError):
    """X'X is not numerically positive definite."""


class NotPositiveDefinite(MlrSelectError):
    """A Cholesky factorization met a non-positive pivot."""


class TooManyPredictors(MlrSelectError):
    """Exhaustive search was requested above the enumeration guard."""


class WrongFlavor(MlrSelectError):
    """A selector was handed a statistic flavor it does not accept."""


class DegenerateSpread(MlrSelectError):
    """The SD or MAD of the KOO statistics is zero."""


class DomainError(MlrSelectError):
    """(alpha, c) lies outside the open simplex alpha > 0, c > 0, alpha + c < 1."""


class ConfigError(MlrSelectError):
    """A simulation configuration violates its invariants."""
