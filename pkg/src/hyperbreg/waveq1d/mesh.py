"""P1 finite elements on (0, 1) with homogeneous Dirichlet conditions."""

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import sparse

from ..expressions import SpaceTimeExpression
from ..triple import (
    ANALYTIC_ORDER,
    OperatorFamily,
    OperatorKind,
    ProblemData,
    RhsFunction,
    SpaceDiscretization,
    smallest_generalized_eigenvalue,
)
from ..utils.exceptions import CoefficientBoundError, ValidationError
from ..utils.helpers import sample_times
from ..utils.logging import get_logger


logger = get_logger()

# Two-point Gauss rule on the reference element [0, 1]
GAUSS_POINTS = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])

SpaceTimeFunction = Callable[[float, int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Mesh1D:
    """Uniform mesh with n_interior free nodes and hat basis functions."""
    n_interior: int

    def __post_init__(self):
        if self.n_interior < 1:
            raise ValidationError(f"Mesh needs at least one interior node, got {self.n_interior}")

    @property
    def m(self) -> int:
        return self.n_interior

    @property
    def h(self) -> float:
        return 1.0 / (self.n_interior + 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        """All nodes including both boundary nodes."""
        return np.arange(self.n_interior + 2) * self.h

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.nodes[1:-1]

    @cached_property
    def quadrature_points(self) -> np.ndarray:
        """Gauss points per element, shape (n_elements, 2)."""
        return self.nodes[:-1, None] + self.h * GAUSS_POINTS[None, :]

    def mass_matrix(self) -> np.ndarray:
        n, h = self.n_interior, self.h
        return sparse.diags(
            [np.full(n - 1, h / 6.0), np.full(n, 4.0 * h / 6.0), np.full(n - 1, h / 6.0)],
            [-1, 0, 1],
        ).toarray()

    def stiffness_matrix(self, element_values: Optional[np.ndarray] = None) -> np.ndarray:
        """Stiffness weighted by one coefficient value per element."""
        n, h = self.n_interior, self.h
        c = np.ones(n + 1) if element_values is None else np.asarray(element_values, dtype=float)
        diagonal = (c[:-1] + c[1:]) / h
        off = -c[1:-1] / h
        return sparse.diags([off, diagonal, off], [-1, 0, 1]).toarray()

    def element_means(self, values_at_points: np.ndarray) -> np.ndarray:
        """Two-point Gauss average per element."""
        return 0.5 * (values_at_points[:, 0] + values_at_points[:, 1])

    def load_vector(self, values_at_points: np.ndarray) -> np.ndarray:
        """Pairings int g phi_i dx from values at the Gauss points."""
        weight = 0.5 * self.h
        rising = weight * (values_at_points @ GAUSS_POINTS)
        falling = weight * (values_at_points @ (1.0 - GAUSS_POINTS))
        return rising[:-1] + falling[1:]

    def interpolate(self, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Nodal interpolant coefficients at the interior nodes."""
        x = self.interior_nodes
        return np.broadcast_to(np.asarray(func(x), dtype=float), x.shape).copy()

    def element_gradients(self, coefficients: np.ndarray) -> np.ndarray:
        """Piecewise constant x-derivative of a P1 function, one value per element."""
        padded = np.concatenate(([0.0], np.asarray(coefficients, dtype=float), [0.0]))
        return np.diff(padded) / self.h

    def refine(self) -> "Mesh1D":
        return Mesh1D(2 * self.n_interior + 1)


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Space-time coefficient a(t, x) with time derivatives up to ``order``.

    ``lower_bound`` is None for perturbation directions, which need no sign.
    """
    evaluator: SpaceTimeFunction
    order: int = ANALYTIC_ORDER
    lower_bound: Optional[float] = None
    name: str = "a"

    def __call__(self, t: float, j: int, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(t, j, x), dtype=float)

    @classmethod
    def from_expression(cls, expression: SpaceTimeExpression, lower_bound: Optional[float] = None,
                        name: str = "a") -> "CoefficientField":
        return cls(expression, ANALYTIC_ORDER, lower_bound, name)

    @classmethod
    def constant(cls, value: float, lower_bound: Optional[float] = None,
                 name: str = "a") -> "CoefficientField":
        def evaluator(t: float, j: int, x: np.ndarray) -> np.ndarray:
            return np.full(np.shape(x), value if j == 0 else 0.0)

        return cls(evaluator, ANALYTIC_ORDER, lower_bound, name)

    def perturbed(self, direction: "CoefficientField", eps: float) -> "CoefficientField":
        """a + eps * direction, keeping the lower bound of a."""
        def evaluator(t: float, j: int, x: np.ndarray) -> np.ndarray:
            return self(t, j, x) + eps * direction(t, j, x)

        return replace(self, evaluator=evaluator, order=min(self.order, direction.order),
                       name=f"{self.name}+{eps:g}*{direction.name}")

    def check_bound(self, mesh: Mesh1D, times: np.ndarray) -> None:
        """Raise if a drops below lower_bound at any Gauss point of any sampled time."""
        if self.lower_bound is None:
            return
        points = mesh.quadrature_points
        for t in times:
            smallest = float(np.min(self(t, 0, points)))
            if smallest < self.lower_bound:
                raise CoefficientBoundError(
                    f"Coefficient {self.name} drops to {smallest:.6g} below its lower bound "
                    f"{self.lower_bound:.6g} at t={t:.6g}",
                    {"t": float(t), "value": smallest, "lower_bound": self.lower_bound},
                )


def coefficient_family(mesh: Mesh1D, a: CoefficientField, horizon: float,
                       coercivity: Optional[float] = None) -> OperatorFamily:
    """A(t)^(j) = int d^j a/dt^j phi_i' phi_j' dx with two-point Gauss per element."""
    points = mesh.quadrature_points

    def evaluator(t: float, j: int) -> np.ndarray:
        return mesh.stiffness_matrix(mesh.element_means(a(t, j, points)))

    return OperatorFamily(a.order, OperatorKind.V_TO_VSTAR, horizon, evaluator,
                          selfadjoint=True, coercivity=coercivity, name="A")


def load_function(mesh: Mesh1D, f: SpaceTimeFunction, horizon: float,
                  order: int = ANALYTIC_ORDER) -> RhsFunction:
    """Pairings of a space-time forcing by two-point Gauss per element."""
    points = mesh.quadrature_points

    def evaluator(t: float, j: int) -> np.ndarray:
        return mesh.load_vector(np.asarray(f(t, j, points), dtype=float))

    return RhsFunction(order, horizon, evaluator, name="f")


def unit_coercivity(mesh: Mesh1D) -> float:
    """Smallest eigenvalue of (K, K + M) for the unit stiffness K."""
    stiffness = mesh.stiffness_matrix()
    return smallest_generalized_eigenvalue(stiffness, stiffness + mesh.mass_matrix())


def assemble_wave_problem(mesh: Mesh1D, a: CoefficientField, f: SpaceTimeFunction,
                          u0: Callable[[np.ndarray], np.ndarray],
                          u1: Callable[[np.ndarray], np.ndarray],
                          horizon: float = 1.0, f_order: int = ANALYTIC_ORDER) -> ProblemData:
    """Galerkin data of u'' - (a u_x)_x = f on (0, 1) with Dirichlet conditions."""
    if a.lower_bound is None or a.lower_bound <= 0.0:
        raise ValidationError("Wave coefficient needs a positive lower bound")
    a.check_bound(mesh, sample_times(horizon))

    mass = mesh.mass_matrix()
    stiffness = mesh.stiffness_matrix()
    space = SpaceDiscretization(mass, stiffness + mass)
    # a >= lower_bound makes A(t) - lower_bound * K positive semidefinite
    a0 = a.lower_bound * unit_coercivity(mesh)

    problem = ProblemData(
        space=space,
        A=coefficient_family(mesh, a, horizon, coercivity=a0),
        B=OperatorFamily.zero(mesh.m, OperatorKind.H_TO_H, horizon, name="B"),
        C=OperatorFamily.constant(mass, OperatorKind.H_TO_H, horizon, name="C",
                                  selfadjoint=True, coercivity=1.0),
        Q=OperatorFamily.zero(mesh.m, OperatorKind.V_TO_H, horizon, name="Q"),
        f=load_function(mesh, f, horizon, f_order),
        u0=mesh.interpolate(u0),
        u1=mesh.interpolate(u1),
        horizon=horizon,
    )
    logger.debug(f"Assembled wave problem: m={mesh.m}, h={mesh.h:.4e}, a0={a0:.4e}")
    return problem
