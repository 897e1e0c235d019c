"""Experiment engine behind the hyperbreg commands."""

import asyncio
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from .config import ExperimentConfig
from .expressions import SpaceTimeExpression
from .formatters.base import ExperimentReport
from .galerkin import solve_forward
from .regularity import compatible_initial_values, energy_report, solve_derivative
from .timecalc import TimeGrid, fd_time_derivative
from .utils.exceptions import ValidationError
from .utils.helpers import format_duration, observed_orders
from .utils.logging import get_logger
from .waveq1d import CoefficientField, ManufacturedCase, Mesh1D, inline_case, manufactured_case
from .waveq1d.cases import error_history
from .waveq1d.frechet import taylor_test


HEADERS: Dict[str, List[str]] = {
    "solve": ["m", "N", "sup_V_energy", "sup_H_energy_deriv", "norm_H_final", "err_LinfH"],
    "derivatives": ["m", "N", "level", "norm_LinfH", "fd_rel_err_L2H", "err_LinfH"],
    "compat": ["m", "level", "norm_V", "norm_H"],
    "frechet-test": ["eps", "remainder", "slope", "first_order", "first_order_slope"],
    "convergence": ["m", "N", "err_LinfH", "observed_order"],
    "energy": ["m", "N", "level", "sup_V_energy", "sup_H_energy_deriv", "data_norm",
               "lambda_observed"],
}

Row = List[Any]


class ExperimentRunner:
    """Runs one configured command and collects its report rows."""

    def __init__(self, config: ExperimentConfig):
        """Initialize runner with a validated configuration."""
        self.config = config
        self.logger = get_logger()
        self.case = self.resolve_case()

    def resolve_case(self) -> ManufacturedCase:
        """Built-in fixture or inline expressions from the config."""
        config = self.config
        if config.case == "inline":
            return inline_case(
                config.coefficient,
                config.lower_bound,
                exact=config.exact,
                forcing=config.forcing,
                initial_displacement=config.initial_displacement,
                initial_velocity=config.initial_velocity,
            )
        return manufactured_case(config.case)

    async def run(self) -> ExperimentReport:
        """Execute the configured command."""
        command = self.config.command
        started = time.perf_counter()
        try:
            self.logger.info(f"Running {command} on case {self.case.name}")
            handlers = {
                "solve": self._solve,
                "derivatives": self._derivatives,
                "compat": self._compat,
                "frechet-test": self._frechet_test,
                "convergence": self._convergence,
                "energy": self._energy,
            }
            with ThreadPoolExecutor(max_workers=self.config.threads) as pool:
                rows, summary = await handlers[command](pool)

            elapsed = time.perf_counter() - started
            summary = {"case": self.case.name, **summary, "elapsed": format_duration(elapsed)}
            self.logger.info(f"{command} finished in {format_duration(elapsed)}")
            return ExperimentReport(command, HEADERS[command], rows, summary)

        except Exception as e:
            self.logger.error(f"Failed to run {command}: {e}")
            raise

    async def _sweep(self, pool: ThreadPoolExecutor,
                     entry: Callable[[int, int], List[Row]]) -> List[Row]:
        """Run entry(m, N) for every sweep pair concurrently, keeping input order."""
        loop = asyncio.get_running_loop()
        pairs = self.config.sweep_pairs()
        results = await asyncio.gather(
            *[loop.run_in_executor(pool, entry, m, n) for m, n in pairs]
        )
        return [row for rows in results for row in rows]

    def _grid(self, n: int) -> TimeGrid:
        return TimeGrid(self.config.T, n)

    def _exact_error(self, mesh: Mesh1D, grid: TimeGrid, solution, gram_h: np.ndarray,
                     j: int = 0) -> float:
        if self.case.exact is None:
            return math.nan
        exact = self.case.exact_trajectory(mesh, grid, j)
        return float(np.max(error_history(solution, exact, gram_h)))

    async def _solve(self, pool: ThreadPoolExecutor) -> Tuple[List[Row], Dict[str, Any]]:
        def entry(m: int, n: int) -> List[Row]:
            mesh, grid = Mesh1D(m), self._grid(n)
            problem = self.case.problem(mesh, self.config.T)
            solution = solve_forward(problem, grid, self.config.lin_tol)
            report = energy_report(solution, problem, compatible_initial_values(problem, 0), 0)
            gram_h = problem.space.gram_h
            return [[
                m, n, report.sup_V_energy, report.sup_H_energy_deriv,
                float(problem.space.h_norm(solution.u.final())),
                self._exact_error(mesh, grid, solution, gram_h),
            ]]

        rows = await self._sweep(pool, entry)
        return rows, {"solves": len(rows)}

    async def _derivatives(self, pool: ThreadPoolExecutor) -> Tuple[List[Row], Dict[str, Any]]:
        k = self.config.k

        def entry(m: int, n: int) -> List[Row]:
            mesh, grid = Mesh1D(m), self._grid(n)
            problem = self.case.problem(mesh, self.config.T)
            result = solve_derivative(problem, k, grid, self.config.lin_tol)
            gram_h = problem.space.gram_h
            rows = []
            for level in range(k + 1):
                solution = result.level(level)
                fd_error = math.nan
                if level > 0:
                    oracle = fd_time_derivative(result.level(level - 1).u)
                    scale = solution.u.l2_norm(gram_h)
                    if scale > 0.0:
                        fd_error = (solution.u - oracle).l2_norm(gram_h) / scale
                rows.append([
                    m, n, level, solution.u.max_norm(gram_h), fd_error,
                    self._exact_error(mesh, grid, solution, gram_h, level),
                ])
            return rows

        rows = await self._sweep(pool, entry)
        return rows, {"k": k, "rows": len(rows)}

    async def _compat(self, pool: ThreadPoolExecutor) -> Tuple[List[Row], Dict[str, Any]]:
        k = self.config.k
        loop = asyncio.get_running_loop()

        def entry(m: int) -> List[Row]:
            problem = self.case.problem(Mesh1D(m), self.config.T)
            ivs = compatible_initial_values(problem, k)
            return [
                [m, level, float(problem.space.v_norm(u)), float(problem.space.h_norm(u))]
                for level, u in enumerate(ivs.vectors)
            ]

        results = await asyncio.gather(
            *[loop.run_in_executor(pool, entry, m) for m in self.config.mesh_sizes]
        )
        rows = [row for block in results for row in block]
        return rows, {"k": k, "levels": k + 2}

    async def _frechet_test(self, pool: ThreadPoolExecutor) -> Tuple[List[Row], Dict[str, Any]]:
        m, n = self.config.sweep_pairs()[-1]
        mesh, grid = Mesh1D(m), self._grid(n)
        direction = CoefficientField.from_expression(
            SpaceTimeExpression.parse(self.config.perturbation), name="h"
        )
        loop = asyncio.get_running_loop()
        table = await loop.run_in_executor(
            None,
            lambda: taylor_test(
                mesh, self.case.coefficient_field(), direction, grid, self.config.eps_list,
                self.case.forcing, self.case.u0, self.case.u1, self.config.lin_tol, executor=pool,
            ),
        )
        rows = [[r.eps, r.remainder, r.slope, r.first_order, r.first_order_slope] for r in table]
        return rows, {"m": m, "N": n, "last_slope": table[-1].slope}

    async def _convergence(self, pool: ThreadPoolExecutor) -> Tuple[List[Row], Dict[str, Any]]:
        if self.case.exact is None:
            raise ValidationError("convergence needs a case with an exact solution")

        def entry(m: int, n: int) -> List[Row]:
            mesh, grid = Mesh1D(m), self._grid(n)
            problem = self.case.problem(mesh, self.config.T)
            solution = solve_forward(problem, grid, self.config.lin_tol)
            return [[m, n, self._exact_error(mesh, grid, solution, problem.space.gram_h)]]

        rows = await self._sweep(pool, entry)
        widths = [1.0 / (row[0] + 1) for row in rows]
        orders = observed_orders([row[2] for row in rows], widths)
        for row, order in zip(rows, orders):
            row.append(order)
        self.logger.debug(f"Observed orders: {orders}")
        return rows, {"last_observed_order": orders[-1]}

    async def _energy(self, pool: ThreadPoolExecutor) -> Tuple[List[Row], Dict[str, Any]]:
        k = self.config.k

        def entry(m: int, n: int) -> List[Row]:
            mesh, grid = Mesh1D(m), self._grid(n)
            problem = self.case.problem(mesh, self.config.T)
            result = solve_derivative(problem, k, grid, self.config.lin_tol)
            return [
                [m, n, report.level, report.sup_V_energy, report.sup_H_energy_deriv,
                 report.data_norm, report.lambda_observed]
                for report in sorted(result.reports, key=lambda r: r.level)
            ]

        rows = await self._sweep(pool, entry)
        return rows, {"k": k, "rows": len(rows)}
