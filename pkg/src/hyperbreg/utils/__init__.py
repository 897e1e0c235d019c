"""Utilities package for hyperbreg."""

from .exceptions import *
from .logging import LoggingManager
from .helpers import *

__all__ = [
    "HyperbregException",
    "ValidationError",
    "DimensionError",
    "DerivativeOrderError",
    "GridMismatchError",
    "CoefficientBoundError",
    "UnknownCaseError",
    "ExpressionError",
    "ProblemValidationError",
    "SolverError",
    "LoggingManager",
    "binomial",
    "format_float",
    "observed_orders",
    "sample_times",
    "merge_dicts",
]
