"""Semantic exception hierarchy shared by every bayesdp module.

Public functions never raise bare ``ValueError``/``ArithmeticError``; they
raise one of the classes below so callers (and the CLI exit-code mapping)
can distinguish bad inputs from numerical breakdown from an exhausted
privacy budget.
"""

from __future__ import annotations


class BayesdpError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BayesdpError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(BayesdpError, ValueError):
    """A configuration object or flag combination is inconsistent."""


class DataError(BayesdpError, ValueError):
    """Well-formed input carries values that violate a data contract."""


class DivergenceUndefinedError(DomainError):
    """The requested Renyi divergence is +inf / undefined for these parameters."""


class NumericsError(BayesdpError, ArithmeticError):
    """An iterative numerical routine failed to converge.

    ``bracket`` carries the last enclosing interval when the failing routine
    was a root finder, else ``None``.
    """

    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        super().__init__(message)
        self.bracket = bracket


class BudgetExhaustedError(BayesdpError):
    """The requested delta does not exceed the accumulated estimator failure mass.

    ``min_delta`` is the smallest (exclusive) feasible delta.
    """

    def __init__(self, message: str, min_delta: float):
        super().__init__(message)
        self.min_delta = min_delta


class ParseError(BayesdpError):
    """An input file could not be parsed; carries the offending location."""

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class VacuousGuaranteeWarning(UserWarning):
    """A computed privacy parameter is >= 1 and therefore carries no content."""
