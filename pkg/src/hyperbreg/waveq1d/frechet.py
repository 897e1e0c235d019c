"""Derivative of the coefficient-to-state map and its Taylor remainder test."""

import math
from concurrent.futures import Executor
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..galerkin import DEFAULT_LIN_TOL, Solution, forward_form, solve_forward
from ..regularity import equation_residual
from ..timecalc import TimeGrid
from ..triple import ProblemData, RhsFunction
from ..utils.exceptions import GridMismatchError, ValidationError
from ..utils.helpers import binomial
from ..utils.logging import get_logger
from .mesh import CoefficientField, Mesh1D, SpaceTimeFunction, assemble_wave_problem


logger = get_logger()


@dataclass
class TaylorRow:
    eps: float
    remainder: float
    slope: float
    first_order: float
    first_order_slope: float


def linearization_rhs(mesh: Mesh1D, h_pert: CoefficientField, u_base: Solution,
                      horizon: float) -> RhsFunction:
    """<g(t), phi_i> = -int h(t, x) d/dx u_base(t, x) phi_i'(x) dx."""
    points = mesh.quadrature_points
    trajectory = u_base.u

    def evaluator(t: float, j: int) -> np.ndarray:
        weights = mesh.element_means(h_pert(t, 0, points))
        return -(mesh.stiffness_matrix(weights) @ trajectory.at(t))

    return RhsFunction(0, horizon, evaluator, name="g")


def derivative_problem(base: ProblemData, mesh: Mesh1D, h_pert: CoefficientField,
                       u_base: Solution) -> ProblemData:
    """Same operators as the base problem, linearization rhs and zero initial data."""
    zeros = np.zeros(base.m)
    return replace(base, f=linearization_rhs(mesh, h_pert, u_base, base.horizon),
                   u0=zeros, u1=zeros.copy())


def frechet_apply(mesh: Mesh1D, a: CoefficientField, h_pert: CoefficientField,
                  u_base: Solution, grid: TimeGrid, lin_tol: float = DEFAULT_LIN_TOL,
                  base: Optional[ProblemData] = None) -> Solution:
    """Directional derivative dF(a)[h] of the discrete coefficient-to-state map."""
    if u_base.grid != grid:
        raise GridMismatchError(
            f"Base solution grid {u_base.grid} does not match {grid}",
            {"base": str(u_base.grid), "grid": str(grid)},
        )
    if base is None:
        base = assemble_wave_problem(mesh, a, _zero_forcing, _zero_data, _zero_data, grid.T)
    problem = derivative_problem(base, mesh, h_pert, u_base)
    # Operators are those of the validated base problem
    return solve_forward(problem, grid, lin_tol, validate=False)


def frechet_residual(mesh: Mesh1D, a: CoefficientField, h_pert: CoefficientField,
                     u_base: Solution, derivative: Solution, horizon: float) -> float:
    """Max interior V*-norm residual of the derivative equation."""
    base = assemble_wave_problem(mesh, a, _zero_forcing, _zero_data, _zero_data, horizon)
    form = forward_form(derivative_problem(base, mesh, h_pert, u_base))
    residual = equation_residual(form, derivative.u, derivative.du)
    return float(np.max(form.space.dual_v_norm(residual.values[1:-1]), initial=0.0))


def _zero_forcing(t: float, j: int, x: np.ndarray) -> np.ndarray:
    return np.zeros(np.shape(x))


def _zero_data(x: np.ndarray) -> np.ndarray:
    return np.zeros(np.shape(x))


def coefficient_from_density(rho: CoefficientField, lower_bound: float) -> CoefficientField:
    """a = 1/rho with time derivatives from the Leibniz rule applied to a * rho = 1."""
    def evaluator(t: float, j: int, x: np.ndarray) -> np.ndarray:
        rho_values = [rho(t, i, x) for i in range(j + 1)]
        values = [1.0 / rho_values[0]]
        for order in range(1, j + 1):
            total = np.zeros_like(values[0])
            for i in range(order):
                total = total + binomial(order, i) * values[i] * rho_values[order - i]
            values.append(-total / rho_values[0])
        return values[j]

    return CoefficientField(evaluator, rho.order, lower_bound, name=f"1/{rho.name}")


def density_perturbation(rho: CoefficientField, h_rho: CoefficientField) -> CoefficientField:
    """Coefficient direction -h_rho / rho**2 belonging to a density direction h_rho."""
    def evaluator(t: float, j: int, x: np.ndarray) -> np.ndarray:
        if j != 0:
            raise ValidationError("density perturbations provide values only")
        return -h_rho(t, 0, x) / rho(t, 0, x) ** 2

    return CoefficientField(evaluator, 0, None, name=f"-{h_rho.name}/{rho.name}^2")


def _slopes(values: Sequence[float], eps_list: Sequence[float]) -> List[float]:
    slopes = [math.nan]
    for i in range(1, len(values)):
        prev, cur = values[i - 1], values[i]
        if prev <= 0.0 or cur <= 0.0:
            slopes.append(math.nan)
        else:
            slopes.append(math.log(prev / cur) / math.log(eps_list[i - 1] / eps_list[i]))
    return slopes


def _check_eps(eps_list: Sequence[float]) -> List[float]:
    eps = [float(e) for e in eps_list]
    if len(eps) < 3:
        raise ValidationError(f"Taylor test needs at least 3 step sizes, got {len(eps)}")
    if any(e <= 0.0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValidationError(f"Taylor step sizes must be positive and decreasing, got {eps}")
    return eps


def _remainder_table(mesh: Mesh1D, coefficient_at: Callable[[float], CoefficientField],
                     direction: CoefficientField, grid: TimeGrid, eps_list: Sequence[float],
                     forcing: SpaceTimeFunction, u0, u1, lin_tol: float,
                     executor: Optional[Executor]) -> List[TaylorRow]:
    eps = _check_eps(eps_list)
    a = coefficient_at(0.0)
    base_problem = assemble_wave_problem(mesh, a, forcing, u0, u1, grid.T)
    base = solve_forward(base_problem, grid, lin_tol)
    derivative = frechet_apply(mesh, a, direction, base, grid, lin_tol, base=base_problem)

    def perturbed_solve(e: float) -> Solution:
        problem = assemble_wave_problem(mesh, coefficient_at(e), forcing, u0, u1, grid.T)
        return solve_forward(problem, grid, lin_tol)

    if executor is None:
        perturbed = [perturbed_solve(e) for e in eps]
    else:
        perturbed = list(executor.map(perturbed_solve, eps))

    gram_h = base_problem.space.gram_h
    remainders, first_orders = [], []
    for e, solution in zip(eps, perturbed):
        change = solution.u - base.u
        first_orders.append(change.l2_norm(gram_h))
        remainders.append((change - e * derivative.u).l2_norm(gram_h))

    slopes = _slopes(remainders, eps)
    first_slopes = _slopes(first_orders, eps)
    if any(math.isnan(s) for s in slopes[1:]):
        logger.warning("Taylor remainders vanish; slopes reported as nan")

    return [
        TaylorRow(e, r, s, fo, fs)
        for e, r, s, fo, fs in zip(eps, remainders, slopes, first_orders, first_slopes)
    ]


def taylor_test(mesh: Mesh1D, a: CoefficientField, h_pert: CoefficientField, grid: TimeGrid,
                eps_list: Sequence[float], forcing: SpaceTimeFunction,
                u0: Callable[[np.ndarray], np.ndarray], u1: Callable[[np.ndarray], np.ndarray],
                lin_tol: float = DEFAULT_LIN_TOL,
                executor: Optional[Executor] = None) -> List[TaylorRow]:
    """|F(a + eps h) - F(a) - eps dF(a)[h]| in L2(I; H) for each eps.

    Raises CoefficientBoundError when a + eps h violates the lower bound of a.
    """
    logger.info(f"Taylor test: m={mesh.m}, N={grid.N}, eps={list(eps_list)}")
    return _remainder_table(mesh, lambda e: a if e == 0.0 else a.perturbed(h_pert, e), h_pert,
                            grid, eps_list, forcing, u0, u1, lin_tol, executor)


def density_taylor_test(mesh: Mesh1D, rho: CoefficientField, h_rho: CoefficientField,
                        grid: TimeGrid, eps_list: Sequence[float], forcing: SpaceTimeFunction,
                        u0: Callable[[np.ndarray], np.ndarray],
                        u1: Callable[[np.ndarray], np.ndarray], lower_bound: float,
                        lin_tol: float = DEFAULT_LIN_TOL,
                        executor: Optional[Executor] = None) -> List[TaylorRow]:
    """Taylor test of rho -> u for u'' - (u_x / rho)_x = f."""
    logger.info(f"Density Taylor test: m={mesh.m}, N={grid.N}, eps={list(eps_list)}")

    def coefficient_at(e: float) -> CoefficientField:
        density = rho if e == 0.0 else rho.perturbed(h_rho, e)
        return coefficient_from_density(density, lower_bound)

    return _remainder_table(mesh, coefficient_at, density_perturbation(rho, h_rho), grid,
                            eps_list, forcing, u0, u1, lin_tol, executor)
