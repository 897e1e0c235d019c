#!/usr/bin/env python3
"""
Desk-scale convergence ladders for the manufactured cases.

Run with ``pytest -m slow``; each ladder finishes in well under two minutes.
"""

import sys
import os

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

import numpy as np
import pytest

from hyperbreg.expressions import SpaceTimeExpression
from hyperbreg.galerkin import solve_form, solve_forward
from hyperbreg.regularity import (
    build_auxiliary,
    compatible_initial_values,
    inductive_residual,
    solve_derivative,
)
from hyperbreg.timecalc import TimeGrid, fd_time_derivative
from hyperbreg.utils.helpers import observed_orders
from hyperbreg.waveq1d import CoefficientField, Mesh1D, error_history, manufactured_case, taylor_test


pytestmark = pytest.mark.slow

LADDER = [(33, 512), (65, 1024), (129, 2048)]


def _widths():
    return [1.0 / (m + 1) for m, _ in LADDER]


def _forward_errors(case_name):
    case = manufactured_case(case_name)
    errors = []
    for m, n in LADDER:
        mesh, grid = Mesh1D(m), TimeGrid(1.0, n)
        problem = case.problem(mesh)
        solution = solve_forward(problem, grid)
        exact = case.exact_trajectory(mesh, grid)
        errors.append(float(np.max(error_history(solution, exact, problem.space.gram_h))))
    return errors


def test_static_sine_converges_at_second_order():
    errors = _forward_errors("static-sine")
    orders = observed_orders(errors, _widths())
    assert min(orders[1:]) >= 1.9
    assert errors[-1] <= 5e-4


def test_time_dependent_coefficient_converges():
    errors = _forward_errors("timedep-sine")
    orders = observed_orders(errors, _widths())
    assert min(orders[1:]) >= 1.8


def test_level_one_trajectory_is_the_time_derivative():
    case = manufactured_case("timedep-sine")
    distances = []
    for m, n in LADDER:
        problem = case.problem(Mesh1D(m))
        result = solve_derivative(problem, 1, TimeGrid(1.0, n))
        gram_h = problem.space.gram_h
        level_one = result.level(1).u
        oracle = fd_time_derivative(result.level(0).u)
        distances.append((level_one - oracle).l2_norm(gram_h) / level_one.l2_norm(gram_h))
    assert distances[-1] <= 0.05
    assert distances[0] > distances[1] > distances[2]


def test_second_level_of_polynomial_case():
    case = manufactured_case("poly-time")
    mesh, grid = Mesh1D(129), TimeGrid(1.0, 256)
    problem = case.problem(mesh)
    result = solve_derivative(problem, 2, grid)
    exact = case.exact_trajectory(mesh, grid, 2)
    assert (result.level(2).u - exact).max_norm(problem.space.gram_h) <= 1e-3


@pytest.mark.parametrize("k", [1, 2])
def test_inductive_identity_under_step_halving(k):
    problem = manufactured_case("poly-time").problem(Mesh1D(33))
    ivs = compatible_initial_values(problem, k)
    lower_form = build_auxiliary(problem, k - 1, ivs)
    upper_form = build_auxiliary(problem, k, ivs)
    steps = (128, 256, 512)
    residuals = []
    for n in steps:
        grid = TimeGrid(1.0, n)
        v = solve_form(upper_form, grid).u
        residuals.append(inductive_residual(lower_form, v, ivs[k - 1], grid))
    orders = observed_orders(residuals, [1.0 / n for n in steps])
    assert min(orders[1:]) >= 1.9


@pytest.mark.parametrize("case_name", ["static-sine", "timedep-sine"])
@pytest.mark.parametrize("k", [0, 1])
def test_energy_ratio_is_mesh_independent(case_name, k):
    case = manufactured_case(case_name)
    ratios = []
    for m, n in LADDER:
        result = solve_derivative(case.problem(Mesh1D(m)), k, TimeGrid(1.0, n))
        ratios.append(result.reports[0].lambda_observed)
    assert max(ratios) <= 2.0 * min(ratios)


def test_conservative_energy_drift():
    m, n = LADDER[-1]
    problem = manufactured_case("static-sine").problem(Mesh1D(m))
    solution = solve_forward(problem, TimeGrid(1.0, n))
    mass, stiffness = problem.C(0.0), problem.A(0.0)
    energy = (np.einsum("ni,ij,nj->n", solution.du.values, mass, solution.du.values)
              + np.einsum("ni,ij,nj->n", solution.u.values, stiffness, solution.u.values))
    assert np.max(np.abs(energy - energy[0])) <= 1e-10 * energy[0]


def test_taylor_slopes_for_time_dependent_coefficient():
    case = manufactured_case("timedep-sine")
    direction = CoefficientField.from_expression(
        SpaceTimeExpression.parse("sin(pi*x)*(1+t)"), name="h"
    )
    rows = taylor_test(Mesh1D(129), case.coefficient_field(), direction, TimeGrid(1.0, 2048),
                       [1e-1, 3e-2, 1e-2], case.forcing, case.u0, case.u1)
    for row in rows[1:]:
        assert row.slope == pytest.approx(2.0, abs=0.1)
