"""Manufactured solutions for the 1D wave equation."""

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from ..expressions import SpaceTimeExpression, wave_forcing
from ..galerkin import Solution
from ..timecalc import TimeGrid, Trajectory
from ..triple import ProblemData
from ..utils.exceptions import UnknownCaseError, ValidationError
from .mesh import CoefficientField, Mesh1D, assemble_wave_problem


@dataclass(frozen=True, eq=False)
class ManufacturedCase:
    """Coefficient, forcing and initial data, with the exact solution when known."""
    name: str
    coefficient: SpaceTimeExpression
    lower_bound: float
    forcing: SpaceTimeExpression
    initial_displacement: SpaceTimeExpression
    initial_velocity: SpaceTimeExpression
    exact: Optional[SpaceTimeExpression] = None

    @classmethod
    def from_exact(cls, name: str, coefficient: SpaceTimeExpression, lower_bound: float,
                   exact: SpaceTimeExpression) -> "ManufacturedCase":
        """Derive forcing and initial data from an exact solution."""
        return cls(
            name=name,
            coefficient=coefficient,
            lower_bound=lower_bound,
            forcing=wave_forcing(coefficient, exact),
            initial_displacement=exact,
            initial_velocity=exact.derivative(1),
            exact=exact,
        )

    def coefficient_field(self) -> CoefficientField:
        return CoefficientField.from_expression(self.coefficient, self.lower_bound)

    def u0(self, x: np.ndarray) -> np.ndarray:
        return self.initial_displacement.evaluate(0.0, x)

    def u1(self, x: np.ndarray) -> np.ndarray:
        return self.initial_velocity.evaluate(0.0, x)

    def problem(self, mesh: Mesh1D, horizon: float = 1.0,
                coefficient: Optional[CoefficientField] = None) -> ProblemData:
        """Assemble the Galerkin problem, optionally with another coefficient."""
        return assemble_wave_problem(
            mesh,
            coefficient or self.coefficient_field(),
            self.forcing,
            self.u0,
            self.u1,
            horizon=horizon,
        )

    def exact_trajectory(self, mesh: Mesh1D, grid: TimeGrid, j: int = 0) -> Trajectory:
        """Nodal interpolant of d^j u/dt^j at every grid node."""
        if self.exact is None:
            raise ValidationError(f"Case '{self.name}' has no exact solution")
        x = mesh.interior_nodes
        return Trajectory.from_function(grid, lambda t: self.exact.evaluate(t, x, j))


def _sine_cases() -> Dict[str, ManufacturedCase]:
    parse = SpaceTimeExpression.parse
    return {
        "static-sine": ManufacturedCase.from_exact(
            "static-sine", parse("1"), 1.0, parse("sin(pi*x)*cos(pi*t)"),
        ),
        "timedep-sine": ManufacturedCase.from_exact(
            "timedep-sine", parse("1 + sin(t)/2"), 0.5, parse("sin(pi*x)*cos(t)"),
        ),
        "poly-time": ManufacturedCase.from_exact(
            "poly-time", parse("1"), 1.0, parse("sin(pi*x)*(1 + t + t**2/2)"),
        ),
    }


CASE_NAMES: List[str] = ["static-sine", "timedep-sine", "poly-time"]


def manufactured_case(name: str) -> ManufacturedCase:
    """Built-in verification fixture by name."""
    if name not in CASE_NAMES:
        raise UnknownCaseError(
            f"Unknown case '{name}'. Valid cases: {', '.join(CASE_NAMES)}",
            {"case": name, "valid": CASE_NAMES},
        )
    return _sine_cases()[name]


def inline_case(coefficient: str, lower_bound: float, exact: Optional[str] = None,
                forcing: Optional[str] = None, initial_displacement: Optional[str] = None,
                initial_velocity: Optional[str] = None) -> ManufacturedCase:
    """Case from expression strings; forcing is derived when an exact solution is given."""
    parse = SpaceTimeExpression.parse
    a = parse(coefficient)
    if exact is not None:
        if forcing is not None or initial_displacement is not None or initial_velocity is not None:
            raise ValidationError(
                "An inline exact solution determines forcing and initial data; give one or the other"
            )
        return ManufacturedCase.from_exact("inline", a, lower_bound, parse(exact))

    return ManufacturedCase(
        name="inline",
        coefficient=a,
        lower_bound=lower_bound,
        forcing=parse(forcing if forcing is not None else "0"),
        initial_displacement=parse(initial_displacement if initial_displacement is not None else "0"),
        initial_velocity=parse(initial_velocity if initial_velocity is not None else "0"),
    )


def error_history(solution: Solution, exact: Trajectory, gram_h: np.ndarray) -> np.ndarray:
    """Per-node H-norm error against an interpolated exact trajectory."""
    return (solution.u - exact).norms(gram_h)
