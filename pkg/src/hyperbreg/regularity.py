"""Higher time regularity: compatibility recursion, auxiliary problems and energy reports.

For level k the unknown is v = u^(k). Differentiating the original equation k
times and rewriting the lower derivatives u^(k-j) through antiderivatives of v
gives

    (C v')' + (k C' + B) v' + (A + Q + k B' + k(k+1)/2 C'') v
        + sum_j (D_j + E_j) R^j v = f~

with zero-seeded j-fold antiderivatives R^j and all seed polynomials moved
into f~.
"""

from dataclasses import dataclass
from math import factorial
from typing import List, Optional, Union

import numpy as np
from scipy import linalg
from scipy.integrate import trapezoid

from .galerkin import (
    DEFAULT_LIN_TOL,
    AuxiliaryForm,
    Solution,
    forward_form,
    require_valid,
    solve_form,
)
from .timecalc import (
    TimeGrid,
    Trajectory,
    antiderivative,
    check_same_grid,
    compose_antiderivatives,
    fd_time_derivative,
)
from .triple import OperatorFamily, OperatorKind, ProblemData, RhsFunction, sum_pairings
from .utils.exceptions import (
    DerivativeOrderError,
    GridMismatchError,
    SolverError,
    ValidationError,
)
from .utils.helpers import binomial
from .utils.logging import get_logger


logger = get_logger()

RHS_NORMS = ("H", "Vstar")


@dataclass
class CompatibleIVs:
    """Initial values u_0, ..., u_{k+1} of the derivatives of u."""
    k: int
    vectors: List[np.ndarray]
    # u_0..u_k are required in V; always true for coefficient vectors
    v_regular: bool = True

    def __getitem__(self, j: int) -> np.ndarray:
        return self.vectors[j]

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass
class EnergyReport:
    """Observed energy estimate for one derivative level."""
    level: int
    sup_V_energy: float
    sup_H_energy_deriv: float
    data_norm: float
    lambda_observed: float


@dataclass
class DerivativeResult:
    """Solutions for levels k down to 0 together with their data."""
    levels: List[Solution]
    ivs: CompatibleIVs
    reports: List[EnergyReport]
    form: AuxiliaryForm

    @property
    def k(self) -> int:
        return self.ivs.k

    def level(self, kappa: int) -> Solution:
        """Solution for u^(kappa)."""
        return self.levels[self.k - kappa]


def _coupling(A: OperatorFamily, Q: OperatorFamily, j: int) -> np.ndarray:
    if j == 0:
        return sum_pairings([A, Q], 0.0)
    return A.evaluate(0.0, j) + Q.evaluate(0.0, j)


def compatible_initial_values(p: ProblemData, k: int) -> CompatibleIVs:
    """u_0 = u0, u_1 = u1 and the recursively defined u_2, ..., u_{k+1}."""
    if k < 0:
        raise ValidationError(f"Level must be non-negative, got {k}")

    vectors = [np.asarray(p.u0, dtype=float), np.asarray(p.u1, dtype=float)]
    if k == 0:
        return CompatibleIVs(0, vectors)

    c0 = p.C.evaluate(0.0, 0)
    try:
        factor = linalg.cho_factor(c0)
    except linalg.LinAlgError as e:
        raise SolverError("C(0) not invertible on discrete space") from e

    for kappa in range(k):
        residual = p.f.evaluate(0.0, kappa).copy()
        residual -= ((kappa + 1) * p.C.evaluate(0.0, 1) + p.B.evaluate(0.0, 0)) @ vectors[kappa + 1]
        for j in range(kappa + 1):
            target = vectors[kappa - j]
            residual -= binomial(kappa, j) * (_coupling(p.A, p.Q, j) @ target)
            # Vanishing binomials never touch the derivative they multiply
            if binomial(kappa, j + 1):
                residual -= binomial(kappa, j + 1) * (p.B.evaluate(0.0, j + 1) @ target)
            if binomial(kappa + 1, j + 2):
                residual -= binomial(kappa + 1, j + 2) * (p.C.evaluate(0.0, j + 2) @ target)
        vectors.append(linalg.cho_solve(factor, residual))

    ivs = CompatibleIVs(k, vectors)
    logger.debug(
        "Compatible initial values: "
        + ", ".join(f"|u_{j}|_V={float(p.space.v_norm(u)):.3e}" for j, u in enumerate(vectors))
    )
    return ivs


def homogeneous_compatibility(p: ProblemData, k: int) -> bool:
    """Zero initial data with f^(i)(0) = 0 for i < k, so every u_j vanishes."""
    if np.any(np.asarray(p.u0) != 0.0) or np.any(np.asarray(p.u1) != 0.0):
        return False
    return all(not np.any(p.f.evaluate(0.0, i)) for i in range(k))


def _seed_polynomial(ivs: CompatibleIVs, k: int, j: int, t: float, r: int) -> np.ndarray:
    """r-th derivative of the seed polynomial sum_{l=k-j}^{k-1} u_l t^(l-k+j) / (l-k+j)!.

    This is u^(k-j) minus the zero-seeded R^j v. The innermost antiderivative is
    seeded with u_{k-1}, so u_{k-1} carries the highest power of t.
    """
    total = np.zeros_like(ivs[0])
    for l in range(k - j, k):
        power = l - (k - j) - r
        if power >= 0:
            total = total + ivs[l] * (t ** power / factorial(power))
    return total


def build_auxiliary(p: ProblemData, k: int, ivs: CompatibleIVs) -> AuxiliaryForm:
    """Level-k auxiliary form; level 0 is the original problem itself."""
    if ivs.k < k:
        raise ValidationError(f"Compatible initial values only reach level {ivs.k}, need {k}")
    if k == 0:
        return forward_form(p)

    beff = OperatorFamily.combination([(k, p.C, 1), (1, p.B, 0)], OperatorKind.H_TO_H, name="Beff")
    qeff = OperatorFamily.combination(
        [(1, p.Q, 0), (k, p.B, 1), (k * (k + 1) / 2, p.C, 2)], OperatorKind.V_TO_H, name="Qeff"
    )
    dops = []
    eops = []
    for j in range(1, k + 1):
        dops.append(OperatorFamily.combination(
            [(binomial(k, j), p.A, j)], OperatorKind.V_TO_VSTAR,
            name=f"D{j}", selfadjoint=p.A.selfadjoint,
        ))
        eops.append(OperatorFamily.combination(
            [(binomial(k + 1, j + 2), p.C, j + 2),
             (binomial(k, j + 1), p.B, j + 1),
             (binomial(k, j), p.Q, j)],
            OperatorKind.V_TO_H, name=f"E{j}",
        ))

    if p.f.order < k:
        raise DerivativeOrderError(
            f"{p.f.name}^({k}) not available: declared order is {p.f.order}",
            {"family": p.f.name, "requested": k, "order": p.f.order},
        )
    f_order = min([p.f.order - k] + [op.order for op in dops + eops])

    def rhs(t: float, r: int) -> np.ndarray:
        total = p.f.evaluate(t, k + r)
        for j, (d_op, e_op) in enumerate(zip(dops, eops), start=1):
            for i in range(r + 1):
                seeds = _seed_polynomial(ivs, k, j, t, r - i)
                if not np.any(seeds):
                    continue
                coupling = d_op.evaluate(t, i) + e_op.evaluate(t, i)
                total = total - binomial(r, i) * (coupling @ seeds)
        return total

    return AuxiliaryForm(
        space=p.space, k=k, Aop=p.A, Cop=p.C, Beff=beff, Qeff=qeff,
        Dops=dops, Eops=eops,
        rhs=RhsFunction(f_order, p.horizon, rhs, name=f"f~{k}"),
        iv0=ivs[k], iv1=ivs[k + 1],
    )


def solve_derivative(p: ProblemData, k: int, grid: TimeGrid, lin_tol: float = DEFAULT_LIN_TOL,
                     validate: bool = True, rhs_norm: str = "H") -> DerivativeResult:
    """Integrate the level-k problem and rebuild levels k-1, ..., 0 by antiderivatives."""
    if validate:
        require_valid(p)
    logger.info(f"Derivative solve: level {k}, m={p.m}, N={grid.N}")

    ivs = compatible_initial_values(p, k)
    form = build_auxiliary(p, k, ivs)
    levels = [solve_form(form, grid, lin_tol)]
    for kappa in range(k - 1, -1, -1):
        upper = levels[-1]
        levels.append(Solution(u=antiderivative(upper.u, ivs[kappa]), du=upper.u))

    reports = [
        energy_report(sol, p, ivs, k - offset, rhs_norm=rhs_norm)
        for offset, sol in enumerate(levels)
    ]
    return DerivativeResult(levels=levels, ivs=ivs, reports=reports, form=form)


def equation_residual(form: AuxiliaryForm, w: Trajectory,
                      dw: Optional[Trajectory] = None) -> Trajectory:
    """Node pairings of (C w')' + Beff w' + (A + Qeff) w + sum (D+E) R^l w - f~.

    The outer derivative differentiates the node values of C w' numerically;
    w' defaults to the numerical derivative of w.
    """
    if dw is None:
        dw = fd_time_derivative(w)
    check_same_grid(w, dw)
    grid = w.grid

    flux = dw.apply(lambda t: form.Cop.evaluate(t, 0))
    outer = fd_time_derivative(flux).values
    integrals = [compose_antiderivatives(w, [np.zeros(w.m)] * l) for l in range(1, form.k + 1)]

    rows = []
    for n, t in enumerate(grid.nodes):
        row = outer[n] + form.Beff.evaluate(t, 0) @ dw.values[n]
        row = row + sum_pairings([form.Aop, form.Qeff], t) @ w.values[n]
        for l, (d_op, e_op) in enumerate(zip(form.Dops, form.Eops)):
            coupling = d_op.evaluate(t, 0) + e_op.evaluate(t, 0)
            row = row + coupling @ integrals[l].values[n]
        rows.append(row - form.rhs.evaluate(t, 0))
    return Trajectory(grid, np.array(rows))


def inductive_residual(form_km1: AuxiliaryForm, v: Trajectory, seed: np.ndarray,
                       grid: TimeGrid) -> float:
    """Max interior V*-norm of the level k-1 residual of w = R_seed v."""
    if v.grid != grid:
        raise GridMismatchError(
            f"Trajectory grid {v.grid} does not match {grid}",
            {"trajectory": str(v.grid), "grid": str(grid)},
        )
    w = antiderivative(v, seed)
    residual = equation_residual(form_km1, w, v)
    norms = form_km1.space.dual_v_norm(residual.values[1:-1])
    return float(np.max(norms, initial=0.0))


def _rhs_norm_squared(rhs: RhsFunction, level: int, space, grid: TimeGrid, rhs_norm: str) -> float:
    if rhs_norm not in RHS_NORMS:
        raise ValidationError(f"Unknown rhs norm '{rhs_norm}', expected one of {RHS_NORMS}")
    nodes = grid.nodes
    if rhs_norm == "H":
        values = np.array([rhs.evaluate(t, level) for t in nodes])
        return float(trapezoid(space.dual_h_norm(values) ** 2, dx=grid.dt))

    total = 0.0
    for order in (level, level + 1):
        values = np.array([rhs.evaluate(t, order) for t in nodes])
        total += float(trapezoid(space.dual_v_norm(values) ** 2, dx=grid.dt))
    return total


def _observed_lambda(level: int, a0: float, c0: float, sup_v: float, sup_h: float,
                     data_norm: float) -> float:
    numerator = a0 * sup_v + c0 * sup_h
    if data_norm == 0.0:
        if numerator != 0.0:
            logger.warning(f"Level {level}: zero data norm with non-zero energy {numerator:.3e}")
        return 0.0
    return numerator / data_norm


def energy_report(sol: Solution, source: Union[ProblemData, AuxiliaryForm],
                  ivs: Optional[CompatibleIVs] = None, k: Optional[int] = None,
                  rhs_norm: str = "H") -> EnergyReport:
    """Energy report of a level solution against problem data or an auxiliary form.

    With ProblemData the data norm is sum_{j<=k} |u_j|_V^2 + |u_{k+1}|_H^2 + |f^(k)|^2;
    with an AuxiliaryForm it is |v_0|_V^2 + |v_1|_H^2 + |f~|^2.
    """
    space = source.space
    sup_v = float(np.max(sol.u.norms(space.gram_v) ** 2))
    sup_h = float(np.max(sol.du.norms(space.gram_h) ** 2))

    if isinstance(source, AuxiliaryForm):
        level = source.k
        a0, c0 = source.Aop.coercivity, source.Cop.coercivity
        data = float(space.v_norm(source.iv0) ** 2 + space.h_norm(source.iv1) ** 2)
        data += _rhs_norm_squared(source.rhs, 0, space, sol.grid, rhs_norm)
    else:
        level = 0 if k is None else k
        if ivs is None:
            ivs = compatible_initial_values(source, level)
        a0, c0 = source.A.coercivity, source.C.coercivity
        data = sum(float(space.v_norm(ivs[j]) ** 2) for j in range(level + 1))
        data += float(space.h_norm(ivs[level + 1]) ** 2)
        data += _rhs_norm_squared(source.f, level, space, sol.grid, rhs_norm)

    if a0 is None or c0 is None:
        raise ValidationError("energy_report needs declared coercivity of A and C")

    return EnergyReport(
        level=level,
        sup_V_energy=sup_v,
        sup_H_energy_deriv=sup_h,
        data_norm=data,
        lambda_observed=_observed_lambda(level, a0, c0, sup_v, sup_h, data),
    )
