"""Uniform time grids, sampled trajectories and discrete time calculus."""

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .utils.exceptions import DimensionError, GridMismatchError, ValidationError


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_n = n * dt on [0, T]."""
    T: float
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError(f"TimeGrid needs N >= 1, got {self.N}")
        if not self.T > 0.0:
            raise ValidationError(f"TimeGrid needs T > 0, got {self.T}")

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def nodes(self) -> np.ndarray:
        # n * dt rather than cumulative sums
        return np.arange(self.N + 1) * self.dt

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.dt

    def node(self, n: int) -> float:
        return n * self.dt

    def refine(self) -> "TimeGrid":
        return TimeGrid(self.T, 2 * self.N)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Node values of a vector-valued function on a TimeGrid, shape (N+1, m)."""
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != self.grid.N + 1:
            raise DimensionError(
                f"Trajectory values must have shape (N+1, m) = ({self.grid.N + 1}, m), "
                f"got {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @classmethod
    def zeros(cls, grid: TimeGrid, m: int) -> "Trajectory":
        return cls(grid, np.zeros((grid.N + 1, m)))

    @classmethod
    def from_function(cls, grid: TimeGrid, func: Callable[[float], np.ndarray]) -> "Trajectory":
        """Sample func at every node."""
        return cls(grid, np.array([np.asarray(func(t), dtype=float) for t in grid.nodes]))

    def at(self, t: float) -> np.ndarray:
        """Linear interpolation between nodes."""
        position = np.clip(t / self.grid.dt, 0.0, float(self.grid.N))
        lower = min(int(np.floor(position)), self.grid.N - 1)
        weight = position - lower
        return (1.0 - weight) * self.values[lower] + weight * self.values[lower + 1]

    def final(self) -> np.ndarray:
        return self.values[-1]

    def norms(self, gram: np.ndarray) -> np.ndarray:
        """Per-node norms sqrt(x_n^T gram x_n)."""
        squared = np.einsum("ni,ij,nj->n", self.values, gram, self.values)
        return np.sqrt(np.maximum(squared, 0.0))

    def max_norm(self, gram: np.ndarray) -> float:
        """Discrete L-infinity-in-time norm."""
        return float(np.max(self.norms(gram)))

    def l2_norm(self, gram: np.ndarray) -> float:
        """Discrete L2-in-time norm, trapezoid in time."""
        return float(np.sqrt(trapezoid(self.norms(gram) ** 2, dx=self.grid.dt)))

    def apply(self, matrix_of_t: Callable[[float], np.ndarray]) -> "Trajectory":
        """Node-wise matrix application n -> G(t_n) x_n."""
        rows = [matrix_of_t(t) @ x for t, x in zip(self.grid.nodes, self.values)]
        return Trajectory(self.grid, np.array(rows))

    def _checked(self, other: "Trajectory") -> np.ndarray:
        check_same_grid(self, other)
        if other.m != self.m:
            raise DimensionError(f"Trajectory dimensions differ: {self.m} vs {other.m}")
        return other.values

    def __add__(self, other: "Trajectory") -> "Trajectory":
        return Trajectory(self.grid, self.values + self._checked(other))

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        return Trajectory(self.grid, self.values - self._checked(other))

    def __mul__(self, scalar: Union[int, float]) -> "Trajectory":
        return Trajectory(self.grid, float(scalar) * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "Trajectory":
        return Trajectory(self.grid, -self.values)


def check_same_grid(first: Trajectory, second: Trajectory) -> None:
    if first.grid != second.grid:
        raise GridMismatchError(
            f"Trajectories live on different grids: {first.grid} vs {second.grid}",
            {"first": str(first.grid), "second": str(second.grid)},
        )


def antiderivative(v: Trajectory, g: np.ndarray) -> Trajectory:
    """g + int_0^t v(s) ds by cumulative trapezoid at every node."""
    g = np.asarray(g, dtype=float)
    if g.shape != (v.m,):
        raise DimensionError(f"Seed has shape {g.shape}, trajectory dimension is {v.m}")
    integral = cumulative_trapezoid(v.values, dx=v.grid.dt, axis=0, initial=0.0)
    return Trajectory(v.grid, integral + g)


def compose_antiderivatives(v: Trajectory, seeds: Sequence[np.ndarray]) -> Trajectory:
    """Apply antiderivatives right to left: the last seed is used first.

    With seeds [u_m, ..., u_n] this is R_{u_m} o ... o R_{u_n} v; an empty list
    returns v itself.
    """
    result = v
    for seed in reversed(list(seeds)):
        result = antiderivative(result, seed)
    return result


def fd_time_derivative(u: Trajectory) -> Trajectory:
    """Central differences inside, second-order one-sided at both ends."""
    if u.grid.N < 2:
        raise ValidationError(f"fd_time_derivative needs N >= 2, got {u.grid.N}")
    return Trajectory(u.grid, np.gradient(u.values, u.grid.dt, axis=0, edge_order=2))
