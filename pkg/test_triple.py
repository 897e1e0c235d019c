#!/usr/bin/env python3
"""
Tests for the discrete Gelfand triple and operator families.
"""

import sys
import os
from dataclasses import replace

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

import numpy as np
import pytest

from hyperbreg.triple import (
    OperatorFamily,
    OperatorKind,
    ProblemData,
    RhsFunction,
    SpaceDiscretization,
    ValidationReport,
    check_derivative_consistency,
    dual_norm,
    estimate_coercivity,
    shift_garding,
    sum_pairings,
    validate_problem,
)
from hyperbreg.utils.exceptions import DerivativeOrderError, ValidationError


def _spd(rng, m, shift=1.0):
    s = rng.standard_normal((m, m))
    return s @ s.T / m + shift * np.eye(m)


def _small_problem(m=3, horizon=1.0):
    rng = np.random.default_rng(7)
    gram_h = np.eye(m)
    gram_v = 2.0 * np.eye(m)
    stiffness = _spd(rng, m, shift=2.0)
    return ProblemData(
        space=SpaceDiscretization(gram_h, gram_v),
        A=OperatorFamily.polynomial([stiffness, 0.1 * np.eye(m)], OperatorKind.V_TO_VSTAR,
                                    horizon, name="A", coercivity=0.5),
        B=OperatorFamily.zero(m, OperatorKind.H_TO_H, horizon, name="B"),
        C=OperatorFamily.constant(np.eye(m), OperatorKind.H_TO_H, horizon, name="C",
                                  coercivity=1.0),
        Q=OperatorFamily.zero(m, OperatorKind.V_TO_H, horizon, name="Q"),
        f=RhsFunction.polynomial([np.ones(m), np.arange(m, dtype=float)], horizon),
        u0=np.ones(m),
        u1=np.zeros(m),
        horizon=horizon,
    )


def test_space_check_accepts_valid_pair():
    space = SpaceDiscretization(np.eye(4), 3.0 * np.eye(4))
    assert space.check() == []
    assert space.m == 4


def test_space_check_reports_each_violation():
    not_dominated = SpaceDiscretization(2.0 * np.eye(2), np.eye(2))
    assert not_dominated.check() == ["domination(H<=V)"]

    skew = np.array([[1.0, 0.5], [0.0, 1.0]])
    assert "symmetric(gramH)" in SpaceDiscretization(skew, 2.0 * np.eye(2)).check()

    indefinite = np.diag([1.0, -1.0])
    assert "positive(gramV)" in SpaceDiscretization(np.eye(2), indefinite).check()


def test_space_rejects_mismatched_shapes():
    with pytest.raises(ValidationError):
        SpaceDiscretization(np.eye(2), np.eye(3))


def test_dual_norms_use_riesz_map():
    gram = np.diag([1.0, 4.0])
    space = SpaceDiscretization(np.eye(2), gram)
    r = np.array([3.0, 4.0])
    expected = np.sqrt(9.0 + 16.0 / 4.0)
    assert dual_norm(r, gram) == pytest.approx(expected, rel=1e-14)
    assert float(space.dual_v_norm(r)) == pytest.approx(expected, rel=1e-14)
    assert float(space.dual_h_norm(r)) == pytest.approx(5.0, rel=1e-14)
    np.testing.assert_allclose(space.dual_v_norm(np.stack([r, 2 * r])), [expected, 2 * expected])


def test_polynomial_family_derivatives_are_exact():
    m0, m1, m2 = np.eye(2), 2.0 * np.eye(2), 3.0 * np.eye(2)
    family = OperatorFamily.polynomial([m0, m1, m2], OperatorKind.H_TO_H, 1.0)
    t = 0.4
    np.testing.assert_allclose(family(t), (1 + 2 * t + 3 * t ** 2) * np.eye(2))
    np.testing.assert_allclose(family(t, 1), (2 + 6 * t) * np.eye(2))
    np.testing.assert_allclose(family(t, 2), 6 * np.eye(2))
    np.testing.assert_allclose(family(t, 3), np.zeros((2, 2)))


def test_derivative_beyond_declared_order_names_the_family():
    family = OperatorFamily.separable(lambda t, j: 1.0 + t, np.eye(2), 2, OperatorKind.H_TO_H,
                                      1.0, name="C")
    with pytest.raises(DerivativeOrderError) as info:
        family.evaluate(0.5, 3)
    assert "C^(3)" in str(info.value)
    assert info.value.details["order"] == 2


def test_finite_difference_family_matches_analytic_derivative():
    base = lambda t: np.sin(t) * np.eye(2)
    family = OperatorFamily.from_finite_differences(base, 2, OperatorKind.H_TO_H, 1.0, step=1e-3)
    np.testing.assert_allclose(family(0.3, 1), np.cos(0.3) * np.eye(2), rtol=1e-6)
    np.testing.assert_allclose(family(0.3, 2), -np.sin(0.3) * np.eye(2), rtol=1e-5)


def test_combination_drops_zero_terms_and_checks_orders():
    shallow = OperatorFamily.separable(lambda t, j: t if j == 0 else float(j == 1), np.eye(2), 1,
                                       OperatorKind.H_TO_H, 1.0, name="S")
    deep = OperatorFamily.polynomial([np.eye(2), np.eye(2)], OperatorKind.H_TO_H, 1.0, name="P")

    combo = OperatorFamily.combination([(0, shallow, 5), (2.0, deep, 1)], OperatorKind.H_TO_H)
    np.testing.assert_allclose(combo(0.2), 2.0 * np.eye(2))

    with pytest.raises(DerivativeOrderError) as info:
        OperatorFamily.combination([(1.0, shallow, 2)], OperatorKind.H_TO_H)
    assert "S^(2)" in str(info.value)

    with pytest.raises(ValidationError):
        OperatorFamily.combination([(0, deep, 0)], OperatorKind.H_TO_H)


def test_validate_problem_accepts_consistent_data():
    report = validate_problem(_small_problem())
    assert report.ok, report.violations


def test_validate_problem_flags_kind_symmetry_and_coercivity():
    p = _small_problem()
    skew = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]])
    bad = replace(
        p,
        A=OperatorFamily.constant(skew, OperatorKind.V_TO_VSTAR, 1.0, name="A",
                                  selfadjoint=True, coercivity=0.5),
        B=OperatorFamily.zero(3, OperatorKind.V_TO_H, 1.0, name="B"),
        C=OperatorFamily.constant(np.eye(3), OperatorKind.H_TO_H, 1.0, name="C",
                                  coercivity=5.0),
    )
    report = validate_problem(bad)
    assert "selfadjoint(A)" in report
    assert "kind(B)" in report
    assert "coercivity(C)" in report


def test_validate_problem_flags_inconsistent_derivatives():
    p = _small_problem()
    wrong = OperatorFamily(
        order=2, kind=OperatorKind.V_TO_VSTAR, horizon=1.0,
        # Claims a zero derivative for a time-dependent family
        evaluator=lambda t, j: (3.0 + t) * np.eye(3) if j == 0 else np.zeros((3, 3)),
        selfadjoint=True, coercivity=1.0, name="A",
    )
    report = validate_problem(replace(p, A=wrong))
    assert report.violations == ["derivative(A)"]


def test_validate_problem_flags_dimensions_and_horizon():
    p = _small_problem()
    report = validate_problem(replace(p, u0=np.ones(2), f=RhsFunction.zero(3, 2.0)))
    assert "dimension(u0)" in report
    assert "horizon(f)" in report


def test_validate_problem_stops_at_broken_space():
    p = _small_problem()
    report = validate_problem(replace(p, space=SpaceDiscretization(2.0 * np.eye(3), np.eye(3))))
    assert report.violations == ["domination(H<=V)"]


def test_check_derivative_consistency_caps_depth():
    calls = []

    def evaluate(t, j):
        calls.append(j)
        return np.array([np.exp(t)])

    failed = check_derivative_consistency(evaluate, 10, 1.0, np.linspace(0.0, 1.0, 5))
    assert failed == []
    assert max(calls) <= 3


def test_garding_shift_assembles_identical_blocks():
    p = _small_problem()
    shifted_a, shifted_q = shift_garding(p.A, p.Q, 3.0, p.space)
    for t in np.linspace(0.0, 1.0, 7):
        original = sum_pairings([p.A, p.Q], t)
        shifted = sum_pairings([shifted_a, shifted_q], t)
        assert np.array_equal(original, shifted)
    np.testing.assert_allclose(shifted_a(0.5), p.A(0.5) + 3.0 * p.space.gram_h)
    np.testing.assert_allclose(shifted_a(0.5, 1), p.A(0.5, 1))


def test_garding_shift_checks_kinds():
    p = _small_problem()
    with pytest.raises(ValidationError):
        shift_garding(p.Q, p.A, 1.0, p.space)


def test_estimate_coercivity_is_monotone_under_refinement():
    family = OperatorFamily.polynomial(
        [2.0 * np.eye(2), np.diag([1.0, -1.0]), np.diag([-3.0, 0.5])],
        OperatorKind.V_TO_VSTAR, 1.0, name="A",
    )
    gram = np.eye(2)
    coarse = estimate_coercivity(family, gram, 19)
    fine = estimate_coercivity(family, gram, 37)
    assert fine <= coarse
    # Smallest eigenvalue of 2 + t - 3 t^2 on [0, 1] is attained at t = 1
    assert fine == pytest.approx(0.0, abs=1e-12)


def test_estimate_coercivity_requires_selfadjoint_family():
    family = OperatorFamily.constant(np.array([[1.0, 2.0], [0.0, 1.0]]), OperatorKind.H_TO_H, 1.0)
    assert not family.selfadjoint
    with pytest.raises(ValidationError, match="requires selfadjoint family"):
        estimate_coercivity(family, np.eye(2))


def test_validation_report_deduplicates():
    report = ValidationReport()
    report.extend(["kind(A)", "kind(A)", "derivative(f)"])
    assert len(report) == 2
    assert not report.ok
