"""Exact q-series engine and numeric checker for theta-function mirrors."""

from .series import (Series, VarTable, SeriesError, TableMismatchError,
                     TruncationError, exp_series, log_series, invert)

__all__ = [
    "Series", "VarTable", "SeriesError", "TableMismatchError",
    "TruncationError", "exp_series", "log_series", "invert",
]

__version__ = "0.1.0"
