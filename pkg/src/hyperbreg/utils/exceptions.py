"""Exception classes for hyperbreg."""

from typing import Optional, Dict, Any


class HyperbregException(Exception):
    """Base exception for hyperbreg."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}


class ValidationError(HyperbregException):
    """Input validation errors."""
    pass


class DimensionError(ValidationError):
    """Vector or matrix size does not match the discrete space."""
    pass


class DerivativeOrderError(ValidationError):
    """A time derivative beyond the declared order was requested."""
    pass


class GridMismatchError(ValidationError):
    """Trajectories or solves live on different time grids."""
    pass


class CoefficientBoundError(ValidationError):
    """A coefficient field dropped below its declared lower bound."""
    pass


class UnknownCaseError(ValidationError):
    """Unknown manufactured case name."""
    pass


class ExpressionError(ValidationError):
    """Inline expression outside the supported grammar."""
    pass


class ProblemValidationError(ValidationError):
    """Problem data violates the discrete well-posedness invariants."""
    pass


class SolverError(HyperbregException):
    """Numerical failure while solving."""
    pass
