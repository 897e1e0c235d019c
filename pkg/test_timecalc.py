#!/usr/bin/env python3
"""
Tests for time grids, trajectories and the discrete time calculus.
"""

import sys
import os

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

import numpy as np
import pytest

from hyperbreg.timecalc import (
    TimeGrid,
    Trajectory,
    antiderivative,
    compose_antiderivatives,
    fd_time_derivative,
)
from hyperbreg.utils.exceptions import DimensionError, GridMismatchError, ValidationError


def test_grid_nodes_are_exact_multiples():
    grid = TimeGrid(1.0, 10)
    assert grid.dt == 0.1
    assert np.array_equal(grid.nodes, np.arange(11) * 0.1)
    assert grid.nodes[-1] == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(grid.midpoints, (np.arange(10) + 0.5) * 0.1)
    assert grid.refine() == TimeGrid(1.0, 20)


@pytest.mark.parametrize("T,N", [(1.0, 0), (0.0, 4), (-1.0, 4)])
def test_grid_rejects_degenerate_parameters(T, N):
    with pytest.raises(ValidationError):
        TimeGrid(T, N)


def test_trajectory_shape_is_checked():
    with pytest.raises(DimensionError):
        Trajectory(TimeGrid(1.0, 4), np.zeros((4, 2)))


def test_linear_interpolation_between_nodes():
    grid = TimeGrid(2.0, 4)
    traj = Trajectory.from_function(grid, lambda t: np.array([t, 1.0 - t]))
    np.testing.assert_allclose(traj.at(0.75), [0.75, 0.25])
    np.testing.assert_allclose(traj.at(2.0), [2.0, -1.0])
    np.testing.assert_allclose(traj.final(), [2.0, -1.0])


def test_arithmetic_requires_same_grid():
    first = Trajectory.zeros(TimeGrid(1.0, 4), 2)
    second = Trajectory.zeros(TimeGrid(1.0, 8), 2)
    with pytest.raises(GridMismatchError):
        first + second
    with pytest.raises(DimensionError):
        first - Trajectory.zeros(TimeGrid(1.0, 4), 3)

    ones = Trajectory(first.grid, np.ones((5, 2)))
    np.testing.assert_array_equal((2 * ones - ones).values, np.ones((5, 2)))
    np.testing.assert_array_equal((-ones).values, -np.ones((5, 2)))


def test_norms_use_gram_matrix():
    grid = TimeGrid(2.0, 8)
    traj = Trajectory(grid, np.tile([1.0, 0.0], (9, 1)))
    gram = np.diag([4.0, 1.0])
    np.testing.assert_allclose(traj.norms(gram), np.full(9, 2.0))
    assert traj.max_norm(gram) == pytest.approx(2.0)
    # sqrt(int_0^2 4 dt)
    assert traj.l2_norm(gram) == pytest.approx(np.sqrt(8.0), rel=1e-14)


def test_apply_is_nodewise():
    grid = TimeGrid(1.0, 2)
    traj = Trajectory(grid, np.ones((3, 2)))
    result = traj.apply(lambda t: t * np.eye(2))
    np.testing.assert_allclose(result.values[:, 0], [0.0, 0.5, 1.0])


def test_antiderivative_is_exact_for_linear_integrands():
    grid = TimeGrid(1.0, 16)
    v = Trajectory.from_function(grid, lambda t: np.array([1.0, 2.0 * t]))
    seed = np.array([3.0, -1.0])
    result = antiderivative(v, seed)
    expected = np.column_stack([3.0 + grid.nodes, -1.0 + grid.nodes ** 2])
    np.testing.assert_allclose(result.values, expected, atol=1e-14)
    np.testing.assert_array_equal(result.values[0], seed)


def test_antiderivative_checks_seed_dimension():
    v = Trajectory.zeros(TimeGrid(1.0, 4), 2)
    with pytest.raises(DimensionError):
        antiderivative(v, np.zeros(3))


def test_composed_antiderivatives_apply_last_seed_first():
    grid = TimeGrid(1.0, 32)
    v = Trajectory(grid, np.ones((33, 1)))
    outer, inner = np.array([2.0]), np.array([5.0])
    result = compose_antiderivatives(v, [outer, inner])
    # outer + inner * t + t^2 / 2; trapezoid is exact for the linear inner integral
    expected = 2.0 + 5.0 * grid.nodes + 0.5 * grid.nodes ** 2
    np.testing.assert_allclose(result.values[:, 0], expected, atol=1e-13)

    assert compose_antiderivatives(v, []) is v


def test_fd_derivative_is_exact_for_quadratics():
    grid = TimeGrid(1.0, 10)
    u = Trajectory.from_function(grid, lambda t: np.array([t ** 2, 3.0 * t]))
    du = fd_time_derivative(u)
    np.testing.assert_allclose(du.values[:, 0], 2.0 * grid.nodes, atol=1e-12)
    np.testing.assert_allclose(du.values[:, 1], 3.0, atol=1e-12)


def test_fd_derivative_needs_two_steps():
    with pytest.raises(ValidationError):
        fd_time_derivative(Trajectory.zeros(TimeGrid(1.0, 1), 1))
