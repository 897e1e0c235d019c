"""hyperbreg - Galerkin solvers and time regularity for second-order hyperbolic equations."""

__version__ = "1.0.0"
__author__ = "hyperbreg Development Team"
__description__ = "Space-time Galerkin solves, derivative levels and energy reports"

from .cli import HyperbregCLI
from .config import ConfigManager, ExperimentConfig
from .experiments import ExperimentRunner
from .galerkin import solve_forward
from .regularity import compatible_initial_values, solve_derivative
from .triple import OperatorFamily, ProblemData, SpaceDiscretization, validate_problem

__all__ = [
    "HyperbregCLI",
    "ConfigManager",
    "ExperimentConfig",
    "ExperimentRunner",
    "OperatorFamily",
    "ProblemData",
    "SpaceDiscretization",
    "compatible_initial_values",
    "solve_derivative",
    "solve_forward",
    "validate_problem",
]
