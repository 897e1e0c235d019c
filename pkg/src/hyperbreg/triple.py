"""Discrete Gelfand triple V -> H -> V* and time-dependent operator families.

Every operator is represented by its pairing matrices ``G[i, j] = <G phi_j, phi_i>``
over one finite basis, whatever its mapping kind. Dual elements are pairing
vectors ``r[i] = <r, phi_i>``; their discrete norms go through the Riesz map of
the corresponding Gram matrix.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from math import factorial, isclose
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .utils.exceptions import DerivativeOrderError, ValidationError
from .utils.helpers import binomial, sample_times
from .utils.logging import get_logger


logger = get_logger()

# Declared order of families whose derivatives exist to every order
ANALYTIC_ORDER = 32
SYMMETRY_RTOL = 1e-12
COERCIVITY_ATOL = 1e-10
DOMINATION_TOL = 1e-12
# Derivative-consistency checks stop at this depth even for analytic families
CONSISTENCY_DEPTH = 3
CONSISTENCY_RTOL = 1e-5

MatrixEvaluator = Callable[[float, int], np.ndarray]
VectorEvaluator = Callable[[float, int], np.ndarray]


class OperatorKind(str, Enum):
    """Mapping kind of an operator family."""
    V_TO_VSTAR = "V->V*"
    H_TO_H = "H->H"
    V_TO_H = "V->H"


def is_symmetric(matrix: np.ndarray, rtol: float = SYMMETRY_RTOL) -> bool:
    """Check ||G - G^T||_max <= rtol * ||G||_max."""
    scale = np.max(np.abs(matrix)) if matrix.size else 0.0
    return bool(np.max(np.abs(matrix - matrix.T), initial=0.0) <= rtol * scale)


def smallest_generalized_eigenvalue(matrix: np.ndarray, gram: np.ndarray) -> float:
    """Smallest eigenvalue of the pencil (sym(matrix), gram)."""
    sym = 0.5 * (matrix + matrix.T)
    return float(linalg.eigh(sym, gram, eigvals_only=True, subset_by_index=[0, 0])[0])


def largest_generalized_eigenvalue(matrix: np.ndarray, gram: np.ndarray) -> float:
    """Largest eigenvalue of the pencil (sym(matrix), gram)."""
    sym = 0.5 * (matrix + matrix.T)
    m = sym.shape[0]
    return float(linalg.eigh(sym, gram, eigvals_only=True, subset_by_index=[m - 1, m - 1])[0])


@dataclass(frozen=True, eq=False)
class SpaceDiscretization:
    """Gram matrices of H and V over one basis of dimension m."""
    gram_h: np.ndarray
    gram_v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gram_h", np.asarray(self.gram_h, dtype=float))
        object.__setattr__(self, "gram_v", np.asarray(self.gram_v, dtype=float))
        if self.gram_h.ndim != 2 or self.gram_h.shape[0] != self.gram_h.shape[1]:
            raise ValidationError("gram_h must be a square matrix")
        if self.gram_v.shape != self.gram_h.shape:
            raise ValidationError(
                f"gram_v shape {self.gram_v.shape} does not match gram_h {self.gram_h.shape}"
            )

    @property
    def m(self) -> int:
        """Basis dimension."""
        return self.gram_h.shape[0]

    @cached_property
    def _factor_h(self):
        return linalg.cho_factor(self.gram_h)

    @cached_property
    def _factor_v(self):
        return linalg.cho_factor(self.gram_v)

    def check(self) -> List[str]:
        """Return the violated space invariants."""
        violations = []
        positive = {}
        for label, gram in (("gramH", self.gram_h), ("gramV", self.gram_v)):
            if not is_symmetric(gram):
                violations.append(f"symmetric({label})")
            smallest = float(np.linalg.eigvalsh(0.5 * (gram + gram.T))[0])
            positive[label] = smallest > 0.0
            if not positive[label]:
                violations.append(f"positive({label})")

        if all(positive.values()):
            ratio = largest_generalized_eigenvalue(self.gram_h, self.gram_v)
            if ratio > 1.0 + DOMINATION_TOL:
                violations.append("domination(H<=V)")
        return violations

    def h_norm(self, x: np.ndarray) -> np.ndarray:
        """H-norm of coefficient vectors (last axis)."""
        return np.sqrt(np.maximum(_quadratic(x, self.gram_h), 0.0))

    def v_norm(self, x: np.ndarray) -> np.ndarray:
        """V-norm of coefficient vectors (last axis)."""
        return np.sqrt(np.maximum(_quadratic(x, self.gram_v), 0.0))

    def dual_v_norm(self, r: np.ndarray) -> np.ndarray:
        """Discrete V*-norm sqrt(r^T gramV^{-1} r) of pairing vectors."""
        return self._riesz_norm(r, self._factor_v)

    def dual_h_norm(self, r: np.ndarray) -> np.ndarray:
        """H-norm of the H-Riesz representative of pairing vectors."""
        return self._riesz_norm(r, self._factor_h)

    def _riesz_norm(self, r: np.ndarray, factor) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        flat = r.reshape(-1, self.m).T
        solved = linalg.cho_solve(factor, flat)
        values = np.sum(flat * solved, axis=0)
        return np.sqrt(np.maximum(values, 0.0)).reshape(r.shape[:-1])


def _quadratic(x: np.ndarray, gram: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.einsum("...i,ij,...j->...", x, gram, x)


def dual_norm(r: np.ndarray, gram: np.ndarray) -> float:
    """Riesz norm sqrt(r^T gram^{-1} r) of a single pairing vector."""
    r = np.asarray(r, dtype=float)
    return float(np.sqrt(max(float(r @ linalg.solve(gram, r, assume_a="pos")), 0.0)))


def _central_difference(base: Callable[[float], np.ndarray], t: float, j: int,
                        step: float) -> np.ndarray:
    """Second-order central difference of order j."""
    if j == 0:
        return np.asarray(base(t), dtype=float)
    total = None
    for i in range(j + 1):
        term = ((-1) ** i) * binomial(j, i) * np.asarray(base(t + (0.5 * j - i) * step), dtype=float)
        total = term if total is None else total + term
    return total / step ** j


def _polynomial_derivative(coefficients: Sequence[np.ndarray], t: float, j: int) -> np.ndarray:
    result = np.zeros_like(coefficients[0], dtype=float)
    for n in range(j, len(coefficients)):
        result = result + (factorial(n) / factorial(n - j)) * t ** (n - j) * coefficients[n]
    return result


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """Time-dependent pairing matrices with derivatives up to ``order``.

    ``shift`` adds ``shift * shift_gram`` to the zeroth-order evaluation only;
    it carries Garding shifts so that opposite shifts cancel exactly in sums.
    """
    order: int
    kind: OperatorKind
    horizon: float
    evaluator: MatrixEvaluator
    selfadjoint: bool = False
    coercivity: Optional[float] = None
    name: str = "G"
    shift: float = 0.0
    shift_gram: Optional[np.ndarray] = field(default=None, repr=False)

    def __call__(self, t: float, j: int = 0) -> np.ndarray:
        return self.evaluate(t, j)

    def evaluate(self, t: float, j: int = 0) -> np.ndarray:
        """Pairing matrix of the j-th time derivative at t."""
        raw = self.evaluate_unshifted(t, j)
        if j == 0 and self.shift != 0.0:
            raw = raw + self.shift * self.shift_gram
        return raw

    def evaluate_unshifted(self, t: float, j: int = 0) -> np.ndarray:
        """Evaluation without the carried Garding shift."""
        if j < 0:
            raise ValueError(f"Derivative order must be non-negative, got {j}")
        if j > self.order:
            raise DerivativeOrderError(
                f"{self.name}^({j}) not available: declared order is {self.order}",
                {"family": self.name, "requested": j, "order": self.order},
            )
        return np.asarray(self.evaluator(t, j), dtype=float)

    def with_shift(self, amount: float, gram: np.ndarray) -> "OperatorFamily":
        """Family with ``amount * gram`` added at zeroth order."""
        return replace(self, shift=self.shift + amount, shift_gram=gram)

    @classmethod
    def constant(cls, matrix: np.ndarray, kind: OperatorKind, horizon: float,
                 name: str = "G", selfadjoint: Optional[bool] = None,
                 coercivity: Optional[float] = None) -> "OperatorFamily":
        """Time-independent family, all derivatives zero."""
        matrix = np.array(matrix, dtype=float)
        matrix.setflags(write=False)
        zeros = np.zeros_like(matrix)
        zeros.setflags(write=False)

        def evaluator(t: float, j: int) -> np.ndarray:
            return matrix if j == 0 else zeros

        if selfadjoint is None:
            selfadjoint = is_symmetric(matrix)
        return cls(ANALYTIC_ORDER, kind, horizon, evaluator, selfadjoint, coercivity, name)

    @classmethod
    def zero(cls, m: int, kind: OperatorKind, horizon: float, name: str = "G") -> "OperatorFamily":
        """Identically vanishing family."""
        return cls.constant(np.zeros((m, m)), kind, horizon, name=name, selfadjoint=True)

    @classmethod
    def polynomial(cls, coefficients: Sequence[np.ndarray], kind: OperatorKind, horizon: float,
                   name: str = "G", selfadjoint: Optional[bool] = None,
                   coercivity: Optional[float] = None) -> "OperatorFamily":
        """G(t) = sum_n coefficients[n] * t**n with exact derivatives."""
        coefficients = [np.array(c, dtype=float) for c in coefficients]
        if not coefficients:
            raise ValidationError("polynomial family needs at least one coefficient")

        def evaluator(t: float, j: int) -> np.ndarray:
            return _polynomial_derivative(coefficients, t, j)

        if selfadjoint is None:
            selfadjoint = all(is_symmetric(c) for c in coefficients)
        return cls(ANALYTIC_ORDER, kind, horizon, evaluator, selfadjoint, coercivity, name)

    @classmethod
    def separable(cls, profile: Callable[[float, int], float], matrix: np.ndarray,
                  order: int, kind: OperatorKind, horizon: float, name: str = "G",
                  selfadjoint: Optional[bool] = None,
                  coercivity: Optional[float] = None) -> "OperatorFamily":
        """G(t) = sigma(t) * matrix where profile(t, j) returns sigma^(j)(t)."""
        matrix = np.array(matrix, dtype=float)

        def evaluator(t: float, j: int) -> np.ndarray:
            return profile(t, j) * matrix

        if selfadjoint is None:
            selfadjoint = is_symmetric(matrix)
        return cls(order, kind, horizon, evaluator, selfadjoint, coercivity, name)

    @classmethod
    def from_finite_differences(cls, base: Callable[[float], np.ndarray], order: int,
                                kind: OperatorKind, horizon: float, step: float = 1e-3,
                                name: str = "G", selfadjoint: bool = False,
                                coercivity: Optional[float] = None) -> "OperatorFamily":
        """Derivatives by central differences of a zeroth-order evaluator.

        ``base`` must accept times up to ``order * step / 2`` outside [0, T].
        """
        def evaluator(t: float, j: int) -> np.ndarray:
            return _central_difference(base, t, j, step)

        return cls(order, kind, horizon, evaluator, selfadjoint, coercivity, name)

    @classmethod
    def combination(cls, terms: Sequence[Tuple[float, "OperatorFamily", int]],
                    kind: OperatorKind, name: str = "G",
                    selfadjoint: bool = False) -> "OperatorFamily":
        """sum_i coef_i * family_i^(offset_i + j); zero coefficients are dropped."""
        active = [(float(c), fam, off) for c, fam, off in terms if c != 0]
        if not active:
            raise ValidationError(f"combination {name} has no non-zero terms")

        horizon = active[0][1].horizon
        order = min(fam.order - off for _, fam, off in active)
        if order < 0:
            missing = min(active, key=lambda item: item[1].order - item[2])
            raise DerivativeOrderError(
                f"{missing[1].name}^({missing[2]}) not available: "
                f"declared order is {missing[1].order}",
                {"family": missing[1].name, "requested": missing[2], "order": missing[1].order},
            )

        shift = 0.0
        shift_gram = None
        for coef, fam, off in active:
            if off == 0 and fam.shift != 0.0:
                shift += coef * fam.shift
                shift_gram = fam.shift_gram

        def evaluator(t: float, j: int) -> np.ndarray:
            total = None
            for coef, fam, off in active:
                term = coef * fam.evaluate_unshifted(t, j + off)
                total = term if total is None else total + term
            return total

        return cls(order, kind, horizon, evaluator, selfadjoint, None, name,
                   shift=shift, shift_gram=shift_gram)


@dataclass(frozen=True, eq=False)
class RhsFunction:
    """Time-dependent pairing vectors <f^(j)(t), phi_i>."""
    order: int
    horizon: float
    evaluator: VectorEvaluator
    name: str = "f"

    def __call__(self, t: float, j: int = 0) -> np.ndarray:
        return self.evaluate(t, j)

    def evaluate(self, t: float, j: int = 0) -> np.ndarray:
        """Pairing vector of the j-th time derivative at t."""
        if j < 0:
            raise ValueError(f"Derivative order must be non-negative, got {j}")
        if j > self.order:
            raise DerivativeOrderError(
                f"{self.name}^({j}) not available: declared order is {self.order}",
                {"family": self.name, "requested": j, "order": self.order},
            )
        return np.asarray(self.evaluator(t, j), dtype=float)

    @classmethod
    def zero(cls, m: int, horizon: float, name: str = "f") -> "RhsFunction":
        return cls.constant(np.zeros(m), horizon, name)

    @classmethod
    def constant(cls, vector: np.ndarray, horizon: float, name: str = "f") -> "RhsFunction":
        vector = np.array(vector, dtype=float)
        vector.setflags(write=False)
        zeros = np.zeros_like(vector)
        zeros.setflags(write=False)
        return cls(ANALYTIC_ORDER, horizon, lambda t, j: vector if j == 0 else zeros, name)

    @classmethod
    def polynomial(cls, coefficients: Sequence[np.ndarray], horizon: float,
                   name: str = "f") -> "RhsFunction":
        """f(t) = sum_n coefficients[n] * t**n with exact derivatives."""
        coefficients = [np.array(c, dtype=float) for c in coefficients]
        return cls(ANALYTIC_ORDER, horizon,
                   lambda t, j: _polynomial_derivative(coefficients, t, j), name)

    @classmethod
    def from_finite_differences(cls, base: Callable[[float], np.ndarray], order: int,
                                horizon: float, step: float = 1e-3,
                                name: str = "f") -> "RhsFunction":
        return cls(order, horizon, lambda t, j: _central_difference(base, t, j, step), name)


@dataclass(frozen=True, eq=False)
class ProblemData:
    """(C u')' + B u' + (A + Q) u = f with u(0) = u0, (C u')(0) = C(0) u1."""
    space: SpaceDiscretization
    A: OperatorFamily
    B: OperatorFamily
    C: OperatorFamily
    Q: OperatorFamily
    f: RhsFunction
    u0: np.ndarray
    u1: np.ndarray
    horizon: float

    @property
    def m(self) -> int:
        return self.space.m

    def families(self) -> List[Tuple[str, OperatorFamily]]:
        return [("A", self.A), ("B", self.B), ("C", self.C), ("Q", self.Q)]


@dataclass
class ValidationReport:
    """Violated invariants, empty when the problem is valid."""
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, violation: str) -> None:
        if violation not in self.violations:
            self.violations.append(violation)

    def extend(self, violations: Sequence[str]) -> None:
        for violation in violations:
            self.add(violation)

    def __contains__(self, violation: str) -> bool:
        return violation in self.violations

    def __len__(self) -> int:
        return len(self.violations)


def check_derivative_consistency(evaluate: Callable[[float, int], np.ndarray], order: int,
                                 horizon: float, times: np.ndarray) -> List[int]:
    """Derivative orders j whose central difference disagrees with evaluate(., j+1)."""
    failed = []
    step = 1e-3 * horizon
    interior = [t for t in times if step < t < horizon - step]
    for j in range(min(order, CONSISTENCY_DEPTH)):
        for t in interior:
            fd = (evaluate(t + step, j) - evaluate(t - step, j)) / (2.0 * step)
            exact = evaluate(t, j + 1)
            scale = max(1.0, float(np.max(np.abs(exact), initial=0.0)),
                        float(np.max(np.abs(evaluate(t, j)), initial=0.0)))
            if np.max(np.abs(fd - exact), initial=0.0) > CONSISTENCY_RTOL * scale:
                failed.append(j)
                break
    return failed


def _check_family(report: ValidationReport, label: str, family: OperatorFamily,
                  expected: OperatorKind, problem: ProblemData, times: np.ndarray) -> None:
    if family.kind != expected:
        report.add(f"kind({label})")
    if not isclose(family.horizon, problem.horizon, rel_tol=1e-12):
        report.add(f"horizon({label})")

    first = family.evaluate(times[0])
    if first.shape != (problem.m, problem.m):
        report.add(f"dimension({label})")
        return

    matrices = [first] + [family.evaluate(t) for t in times[1:]]
    if family.selfadjoint and not all(is_symmetric(mat) for mat in matrices):
        report.add(f"selfadjoint({label})")

    if check_derivative_consistency(family.evaluate, family.order, family.horizon, times):
        report.add(f"derivative({label})")

    if family.coercivity is not None:
        gram = problem.space.gram_v if family.kind == OperatorKind.V_TO_VSTAR else problem.space.gram_h
        threshold = family.coercivity - COERCIVITY_ATOL
        if any(smallest_generalized_eigenvalue(mat, gram) < threshold for mat in matrices):
            report.add(f"coercivity({label})")


def validate_problem(p: ProblemData) -> ValidationReport:
    """Check every discrete invariant at a deterministic sample of times."""
    report = ValidationReport()
    space_violations = p.space.check()
    report.extend(space_violations)
    if space_violations:
        # Generalized eigenproblems below need SPD Gram matrices
        logger.debug(f"Space invariants violated: {space_violations}")
        return report

    times = sample_times(p.horizon)
    _check_family(report, "A", p.A, OperatorKind.V_TO_VSTAR, p, times)
    _check_family(report, "B", p.B, OperatorKind.H_TO_H, p, times)
    _check_family(report, "C", p.C, OperatorKind.H_TO_H, p, times)
    _check_family(report, "Q", p.Q, OperatorKind.V_TO_H, p, times)

    for label, family in (("A", p.A), ("C", p.C)):
        if not family.selfadjoint:
            report.add(f"selfadjoint({label})")
        if family.coercivity is None or family.coercivity <= 0.0:
            report.add(f"coercivity({label})")

    if not isclose(p.f.horizon, p.horizon, rel_tol=1e-12):
        report.add("horizon(f)")
    if p.f.evaluate(times[0]).shape != (p.m,):
        report.add("dimension(f)")
    elif check_derivative_consistency(p.f.evaluate, p.f.order, p.f.horizon, times):
        report.add("derivative(f)")

    for label, vector in (("u0", p.u0), ("u1", p.u1)):
        if np.shape(vector) != (p.m,):
            report.add(f"dimension({label})")

    if report.violations:
        logger.debug(f"Problem validation found: {report.violations}")
    return report


def shift_garding(A: OperatorFamily, Q: OperatorFamily, lam: float,
                  space: SpaceDiscretization) -> Tuple[OperatorFamily, OperatorFamily]:
    """Replace A by A + lam*I and Q by Q - lam*I (identity as H-pairing)."""
    if A.kind != OperatorKind.V_TO_VSTAR:
        raise ValidationError(f"shift_garding expects A of kind V->V*, got {A.kind.value}")
    if Q.kind != OperatorKind.V_TO_H:
        raise ValidationError(f"shift_garding expects Q of kind V->H, got {Q.kind.value}")
    return A.with_shift(lam, space.gram_h), Q.with_shift(-lam, space.gram_h)


def estimate_coercivity(G: OperatorFamily, gram: np.ndarray, sample_count: int = 19) -> float:
    """Minimum over sampled times of the smallest eigenvalue of (G(t), gram)."""
    if not G.selfadjoint:
        raise ValidationError("requires selfadjoint family", {"family": G.name})
    if sample_count < 2:
        raise ValidationError("sample_count must be at least 2")

    estimate = np.inf
    for t in np.linspace(0.0, G.horizon, sample_count):
        matrix = G.evaluate(t)
        if not is_symmetric(matrix):
            raise ValidationError("requires selfadjoint family", {"family": G.name, "t": float(t)})
        estimate = min(estimate, smallest_generalized_eigenvalue(matrix, gram))
    return float(estimate)


def sum_pairings(families: Sequence[OperatorFamily], t: float) -> np.ndarray:
    """Zeroth-order sum of families with their Garding shifts collected first."""
    total = None
    shift = 0.0
    shift_gram = None
    for family in families:
        term = family.evaluate_unshifted(t, 0)
        total = term if total is None else total + term
        if family.shift != 0.0:
            shift += family.shift
            shift_gram = family.shift_gram
    if shift != 0.0:
        total = total + shift * shift_gram
    return total
