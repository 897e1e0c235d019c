"""Galerkin equations as a first-order block system and its implicit-midpoint integrator.

The state is y = (beta, gamma^0, ..., gamma^k) with gamma^0 the Galerkin
coefficients of v, beta = gamma^0' and gamma^l' = gamma^(l-1). The system reads

    M_-2(t) beta' = F(t) - M_-1(t) beta - sum_l M_l(t) gamma^l

with M_-2 = C, M_-1 = C' + Beff, M_0 = A + Qeff and M_l = D_l + E_l.
"""

from dataclasses import dataclass, field
from math import isclose
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from .timecalc import TimeGrid, Trajectory
from .triple import (
    OperatorFamily,
    ProblemData,
    RhsFunction,
    SpaceDiscretization,
    sum_pairings,
    validate_problem,
)
from .utils.exceptions import (
    DimensionError,
    GridMismatchError,
    ProblemValidationError,
    SolverError,
    ValidationError,
)
from .utils.logging import get_logger


logger = get_logger()

DEFAULT_LIN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class AuxiliaryForm:
    """Level-k problem satisfied by v = u^(k)."""
    space: SpaceDiscretization
    k: int
    Aop: OperatorFamily
    Cop: OperatorFamily
    Beff: OperatorFamily
    Qeff: OperatorFamily
    Dops: List[OperatorFamily]
    Eops: List[OperatorFamily]
    rhs: RhsFunction
    iv0: np.ndarray
    iv1: np.ndarray

    def __post_init__(self):
        if len(self.Dops) != self.k or len(self.Eops) != self.k:
            raise ValidationError(
                f"Level {self.k} form needs {self.k} D and E operators, "
                f"got {len(self.Dops)} and {len(self.Eops)}"
            )
        for label, vector in (("iv0", self.iv0), ("iv1", self.iv1)):
            if np.shape(vector) != (self.space.m,):
                raise DimensionError(
                    f"{label} has shape {np.shape(vector)}, space dimension is {self.space.m}"
                )

    @property
    def horizon(self) -> float:
        return self.Aop.horizon


@dataclass
class Solution:
    """Galerkin trajectory u (gamma^0) and its time derivative du (beta)."""
    u: Trajectory
    du: Trajectory
    state: Optional[Trajectory] = field(default=None, repr=False)

    @property
    def grid(self) -> TimeGrid:
        return self.u.grid


def forward_form(p: ProblemData) -> AuxiliaryForm:
    """The original problem viewed as the level-0 auxiliary form."""
    return AuxiliaryForm(
        space=p.space, k=0, Aop=p.A, Cop=p.C, Beff=p.B, Qeff=p.Q,
        Dops=[], Eops=[], rhs=p.f,
        iv0=np.asarray(p.u0, dtype=float), iv1=np.asarray(p.u1, dtype=float),
    )


class BlockSystem:
    """Block first-order system of dimension (k+2)m built from an AuxiliaryForm."""

    def __init__(self, form: AuxiliaryForm, init: np.ndarray):
        self.form = form
        self.space = form.space
        self.k = form.k
        self.init = init

    @property
    def m(self) -> int:
        return self.space.m

    @property
    def dimension(self) -> int:
        return (self.k + 2) * self.m

    @property
    def horizon(self) -> float:
        return self.form.horizon

    def blocks(self, t: float) -> Tuple[np.ndarray, np.ndarray, List[np.ndarray]]:
        """(M_-2, M_-1, [M_0, ..., M_k]) at time t."""
        form = self.form
        m_c = form.Cop.evaluate(t, 0)
        m_v = form.Cop.evaluate(t, 1) + form.Beff.evaluate(t, 0)
        couplings = [sum_pairings([form.Aop, form.Qeff], t)]
        for d_op, e_op in zip(form.Dops, form.Eops):
            couplings.append(sum_pairings([d_op, e_op], t))
        return m_c, m_v, couplings

    def lhs(self, t: float) -> np.ndarray:
        """diag(M_-2(t), I)."""
        m_c = self.form.Cop.evaluate(t, 0)
        return linalg.block_diag(m_c, np.eye((self.k + 1) * self.m))

    def rhs_mat(self, t: float) -> np.ndarray:
        """Top row [-M_-1 | -M_0 | ... | -M_k], identity subdiagonal."""
        m = self.m
        _, m_v, couplings = self.blocks(t)
        matrix = np.zeros((self.dimension, self.dimension))
        matrix[:m, :m] = -m_v
        for l, coupling in enumerate(couplings):
            matrix[:m, (l + 1) * m:(l + 2) * m] = -coupling
        for l in range(self.k + 1):
            # gamma^l' = previous block (beta for l = 0)
            matrix[(l + 1) * m:(l + 2) * m, l * m:(l + 1) * m] = np.eye(m)
        return matrix

    def forcing(self, t: float) -> np.ndarray:
        vector = np.zeros(self.dimension)
        vector[:self.m] = self.form.rhs.evaluate(t)
        return vector


def assemble_block_system(form: AuxiliaryForm) -> BlockSystem:
    """Build the block system and its initial state."""
    m_c0 = form.Cop.evaluate(0.0, 0)
    try:
        factor = linalg.cho_factor(m_c0)
    except linalg.LinAlgError as e:
        raise SolverError("C(0) not invertible on discrete space", {"step": 0}) from e

    beta0 = linalg.cho_solve(factor, m_c0 @ form.iv1)
    init = np.zeros((form.k + 2) * form.space.m)
    m = form.space.m
    init[:m] = beta0
    init[m:2 * m] = form.iv0
    logger.debug(f"Assembled block system: level {form.k}, dimension {init.size}")
    return BlockSystem(form, init)


def _accept(matrix: np.ndarray, rhs: np.ndarray, step: int, lin_tol: float) -> np.ndarray:
    try:
        solution = linalg.solve(matrix, rhs, check_finite=False)
    except (linalg.LinAlgError, ValueError) as e:
        raise SolverError(f"Linear solve failed at step {step}: {e}", {"step": step}) from e

    residual = np.max(np.abs(matrix @ solution - rhs), initial=0.0)
    bound = lin_tol * max(1.0, float(np.max(np.abs(rhs), initial=0.0)))
    if not np.isfinite(residual) or residual > bound:
        raise SolverError(
            f"Linear solve residual {residual:.3e} exceeds {bound:.3e} at step {step}",
            {"step": step, "residual": float(residual)},
        )
    return solution


def integrate(sys: BlockSystem, grid: TimeGrid, lin_tol: float = DEFAULT_LIN_TOL) -> Trajectory:
    """Implicit midpoint over the grid, returning the full state trajectory.

    Each step eliminates the gamma blocks exactly (gamma^l_{n+1} is affine in
    beta_{n+1}) and solves one m x m system for beta_{n+1}.
    """
    if not isclose(grid.T, sys.horizon, rel_tol=1e-12):
        raise GridMismatchError(
            f"Grid horizon {grid.T} does not match system horizon {sys.horizon}",
            {"grid": grid.T, "system": sys.horizon},
        )

    m, k, dt = sys.m, sys.k, grid.dt
    states = np.empty((grid.N + 1, sys.dimension))
    states[0] = sys.init
    halfstep = 0.5 * dt
    gains = [halfstep ** (l + 1) for l in range(k + 1)]

    for n in range(grid.N):
        t_mid = (n + 0.5) * dt
        m_c, m_v, couplings = sys.blocks(t_mid)
        forcing = sys.form.rhs.evaluate(t_mid)

        beta = states[n, :m]
        gammas = [states[n, (l + 1) * m:(l + 2) * m] for l in range(k + 1)]

        # gamma^l_{n+1} = offsets[l] + gains[l] * beta_{n+1}
        offsets = [gammas[0] + halfstep * beta]
        for l in range(1, k + 1):
            offsets.append(gammas[l] + halfstep * (gammas[l - 1] + offsets[l - 1]))

        matrix = m_c / dt + 0.5 * m_v
        rhs = m_c @ beta / dt - 0.5 * (m_v @ beta) + forcing
        for l, coupling in enumerate(couplings):
            matrix = matrix + (0.5 * gains[l]) * coupling
            rhs = rhs - 0.5 * (coupling @ (gammas[l] + offsets[l]))

        beta_next = _accept(matrix, rhs, n + 1, lin_tol)
        states[n + 1, :m] = beta_next
        for l in range(k + 1):
            states[n + 1, (l + 1) * m:(l + 2) * m] = offsets[l] + gains[l] * beta_next

    return Trajectory(grid, states)


def solve_form(form: AuxiliaryForm, grid: TimeGrid, lin_tol: float = DEFAULT_LIN_TOL) -> Solution:
    """Integrate an auxiliary form and split the state into (v, v')."""
    system = assemble_block_system(form)
    state = integrate(system, grid, lin_tol)
    m = form.space.m
    return Solution(
        u=Trajectory(grid, state.values[:, m:2 * m]),
        du=Trajectory(grid, state.values[:, :m]),
        state=state,
    )


def require_valid(p: ProblemData) -> None:
    report = validate_problem(p)
    if not report.ok:
        raise ProblemValidationError(
            f"Problem data violates: {', '.join(report.violations)}",
            {"violations": list(report.violations)},
        )


def solve_forward(p: ProblemData, grid: TimeGrid, lin_tol: float = DEFAULT_LIN_TOL,
                  validate: bool = True) -> Solution:
    """Galerkin solution of the original problem."""
    if validate:
        require_valid(p)
    logger.info(f"Forward solve: m={p.m}, N={grid.N}, T={grid.T}")
    return solve_form(forward_form(p), grid, lin_tol)
