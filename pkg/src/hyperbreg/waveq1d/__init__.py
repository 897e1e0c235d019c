"""One-dimensional wave equation u'' - (a u_x)_x = f on (0, 1)."""

from .cases import CASE_NAMES, ManufacturedCase, error_history, inline_case, manufactured_case
from .frechet import (
    TaylorRow,
    coefficient_from_density,
    density_perturbation,
    density_taylor_test,
    frechet_apply,
    frechet_residual,
    taylor_test,
)
from .mesh import CoefficientField, Mesh1D, assemble_wave_problem

__all__ = [
    "CASE_NAMES",
    "CoefficientField",
    "ManufacturedCase",
    "Mesh1D",
    "TaylorRow",
    "assemble_wave_problem",
    "coefficient_from_density",
    "density_perturbation",
    "density_taylor_test",
    "error_history",
    "frechet_apply",
    "frechet_residual",
    "inline_case",
    "manufactured_case",
    "taylor_test",
]
