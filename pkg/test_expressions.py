#!/usr/bin/env python3
"""
Tests for inline space-time expressions.
"""

import sys
import os

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

import numpy as np
import pytest

from hyperbreg.expressions import SpaceTimeExpression, wave_forcing
from hyperbreg.utils.exceptions import ExpressionError


def test_evaluation_and_time_derivatives():
    expr = SpaceTimeExpression.parse("sin(pi*x)*cos(pi*t)")
    x = np.linspace(0.0, 1.0, 5)
    t = 0.2
    base = np.sin(np.pi * x) * np.cos(np.pi * t)
    np.testing.assert_allclose(expr.evaluate(t, x), base, atol=1e-15)
    np.testing.assert_allclose(expr.evaluate(t, x, 2), -np.pi ** 2 * base, atol=1e-13)
    np.testing.assert_allclose(expr(t, 1, x), -np.pi * np.sin(np.pi * x) * np.sin(np.pi * t),
                               atol=1e-14)
    np.testing.assert_allclose(expr.evaluate_dx(t, x), np.pi * np.cos(np.pi * x) * np.cos(np.pi * t),
                               atol=1e-14)


def test_constants_broadcast_to_points():
    points = np.zeros((3, 2))
    assert SpaceTimeExpression.parse("3").evaluate(0.0, points).shape == (3, 2)
    np.testing.assert_array_equal(SpaceTimeExpression.parse(2.5).evaluate(1.0, points), 2.5)
    assert SpaceTimeExpression.parse("0").is_zero
    np.testing.assert_array_equal(SpaceTimeExpression.parse("t**2").evaluate(1.0, points, 3), 0.0)


def test_division_by_numbers_and_time_dependence():
    expr = SpaceTimeExpression.parse("1 + sin(t)/2 - x**2/4")
    assert expr.depends_on_time()
    assert not SpaceTimeExpression.parse("x*(1-x)").depends_on_time()
    np.testing.assert_allclose(expr.evaluate(0.0, np.array([1.0])), [0.75])


@pytest.mark.parametrize("text", [
    "exp(x)",
    "x/t",
    "x**0.5",
    "t**-1",
    "y + 1",
    "1 +",
    "",
    "   ",
    "sqrt(x)",
])
def test_rejects_expressions_outside_grammar(text):
    with pytest.raises(ExpressionError):
        SpaceTimeExpression.parse(text)


def test_sum_and_product():
    a = SpaceTimeExpression.parse("t")
    b = SpaceTimeExpression.parse("x")
    np.testing.assert_allclose((a + b).evaluate(2.0, np.array([3.0])), [5.0])
    np.testing.assert_allclose((a * b).evaluate(2.0, np.array([3.0])), [6.0])


def test_wave_forcing_for_time_dependent_coefficient():
    a = SpaceTimeExpression.parse("1 + sin(t)/2")
    u = SpaceTimeExpression.parse("sin(pi*x)*cos(t)")
    f = wave_forcing(a, u)
    x = np.array([0.3, 0.6])
    t = 0.4
    expected = (-1.0 + np.pi ** 2 * (1 + np.sin(t) / 2)) * np.sin(np.pi * x) * np.cos(t)
    np.testing.assert_allclose(f.evaluate(t, x), expected, rtol=1e-13)
    assert f.derivative(1).evaluate(t, x).shape == x.shape
