"""Space-time expressions in t and x with analytic time derivatives.

Expressions are parsed with sympy and restricted to sums and products of
numbers, pi, non-negative integer powers and sin/cos of t and x.
"""

import threading
from tokenize import TokenError
from typing import Callable, Dict, Tuple, Union

import numpy as np
import sympy
from sympy.parsing.sympy_parser import parse_expr, standard_transformations
from sympy.core.function import AppliedUndef

from .utils.exceptions import ExpressionError


t_sym, x_sym = sympy.symbols("t x", real=True)

_PARSE_GLOBALS = {
    "__builtins__": {},
    "Integer": sympy.Integer,
    "Float": sympy.Float,
    "Rational": sympy.Rational,
    "Symbol": sympy.Symbol,
    "Function": sympy.Function,
    "sin": sympy.sin,
    "cos": sympy.cos,
    "pi": sympy.pi,
}


def _check_grammar(node: sympy.Basic, source: str) -> None:
    if node.is_number:
        if not node.is_real or not node.is_finite:
            raise ExpressionError(f"Non-real constant {node} in '{source}'")
        return
    if node.is_Symbol:
        if node not in (t_sym, x_sym):
            raise ExpressionError(f"Unknown symbol '{node}' in '{source}', only t and x are allowed")
        return
    if isinstance(node, AppliedUndef):
        raise ExpressionError(f"Unknown function '{node.func}' in '{source}'")
    if isinstance(node, sympy.Pow):
        exponent = node.exp
        if not (exponent.is_Integer and exponent >= 0):
            raise ExpressionError(
                f"Only non-negative integer powers are supported, got '{node}' in '{source}'"
            )
        _check_grammar(node.base, source)
        return
    if isinstance(node, (sympy.Add, sympy.Mul, sympy.sin, sympy.cos)):
        for arg in node.args:
            _check_grammar(arg, source)
        return
    raise ExpressionError(f"Unsupported construct '{node}' in '{source}'")


class SpaceTimeExpression:
    """Scalar field g(t, x) with derivatives in t of every order."""

    def __init__(self, expr: Union[sympy.Expr, int, float], source: str = ""):
        self.expr = sympy.sympify(expr)
        self.source = source or str(self.expr)
        self._compiled: Dict[Tuple[int, int], Callable] = {}
        self._lock = threading.Lock()

    @classmethod
    def parse(cls, text: Union[str, int, float]) -> "SpaceTimeExpression":
        """Parse text and reject anything outside the grammar."""
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            return cls(sympy.Float(text) if isinstance(text, float) else sympy.Integer(text))
        if not isinstance(text, str) or not text.strip():
            raise ExpressionError(f"Expected a non-empty expression, got {text!r}")
        try:
            expr = parse_expr(
                text,
                local_dict={"t": t_sym, "x": x_sym},
                global_dict=dict(_PARSE_GLOBALS),
                transformations=standard_transformations,
            )
        except (SyntaxError, TypeError, ValueError, NameError, AttributeError,
                sympy.SympifyError, TokenError) as e:
            raise ExpressionError(f"Cannot parse expression '{text}': {e}") from e
        if not isinstance(expr, sympy.Basic):
            raise ExpressionError(f"Expression '{text}' is not a scalar formula")
        _check_grammar(expr, text)
        return cls(expr, text)

    def __repr__(self) -> str:
        return f"SpaceTimeExpression({self.source!r})"

    @property
    def is_zero(self) -> bool:
        return self.expr == 0

    def depends_on_time(self) -> bool:
        return t_sym in self.expr.free_symbols

    def derivative(self, j: int = 1, variable: str = "t") -> "SpaceTimeExpression":
        """Symbolic j-th derivative in t or x."""
        symbol = t_sym if variable == "t" else x_sym
        return SpaceTimeExpression(sympy.diff(self.expr, symbol, j))

    def _function(self, j: int, i: int = 0) -> Callable:
        key = (j, i)
        compiled = self._compiled.get(key)
        if compiled is None:
            expr = self.expr
            if j:
                expr = sympy.diff(expr, t_sym, j)
            if i:
                expr = sympy.diff(expr, x_sym, i)
            compiled = sympy.lambdify((t_sym, x_sym), expr, "numpy")
            with self._lock:
                self._compiled[key] = compiled
        return compiled

    def evaluate(self, t: float, x, j: int = 0) -> np.ndarray:
        """Values of d^j/dt^j g(t, x), broadcast to the shape of x."""
        x = np.asarray(x, dtype=float)
        values = self._function(j)(float(t), x)
        return np.broadcast_to(np.asarray(values, dtype=float), x.shape).copy()

    def evaluate_dx(self, t: float, x, j: int = 0) -> np.ndarray:
        """Values of the mixed derivative d/dx d^j/dt^j g(t, x)."""
        x = np.asarray(x, dtype=float)
        values = self._function(j, 1)(float(t), x)
        return np.broadcast_to(np.asarray(values, dtype=float), x.shape).copy()

    def __call__(self, t: float, j: int, x) -> np.ndarray:
        return self.evaluate(t, x, j)

    def __add__(self, other: "SpaceTimeExpression") -> "SpaceTimeExpression":
        return SpaceTimeExpression(self.expr + other.expr)

    def __mul__(self, other: "SpaceTimeExpression") -> "SpaceTimeExpression":
        return SpaceTimeExpression(self.expr * other.expr)


def wave_forcing(coefficient: SpaceTimeExpression,
                 exact: SpaceTimeExpression) -> SpaceTimeExpression:
    """f = u_tt - (a u_x)_x for a manufactured solution u."""
    u, a = exact.expr, coefficient.expr
    forcing = sympy.diff(u, t_sym, 2) - sympy.diff(a * sympy.diff(u, x_sym), x_sym)
    return SpaceTimeExpression(forcing)
