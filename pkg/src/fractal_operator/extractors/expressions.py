"""
Small expression grammar for seeds, bases, scalings and table profiles.

Accepted: numbers, the variable x, pi, sin, cos, exp, abs, the operators
+ - * / ^ ** and parentheses. Expressions are parsed with sympy, so exact
derivative stacks come from symbolic differentiation.
"""
import logging
import re
from typing import Callable, List, Tuple

import numpy as np
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from ..exceptions import ExpressionError
from ..grid.grid_function import GridFunction, grid_nodes
from ..models.settings import DEFAULT_GRID_LEVEL

logger = logging.getLogger(__name__)

X = sympy.Symbol("x", real=True)

ALLOWED_NAMES = {
    "x": X,
    "pi": sympy.pi,
    "sin": sympy.sin,
    "cos": sympy.cos,
    "exp": sympy.exp,
    "abs": sympy.Abs,
}

_ALLOWED_CHARS = re.compile(r"^[0-9A-Za-z_+\-*/^().\s]*$")
_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_TRANSFORMATIONS = standard_transformations + (convert_xor,)


def parse_expression(text: str) -> sympy.Expr:
    """Parse text in the grammar into a sympy expression in x."""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("expression must be a non-empty string")
    if not _ALLOWED_CHARS.match(text) or "__" in text:
        raise ExpressionError(f"unsupported characters in expression {text!r}")
    for name in _NAME.findall(_NUMBER.sub(" ", text)):
        if name not in ALLOWED_NAMES:
            raise ExpressionError(f"unknown name {name!r} in expression {text!r}")
    try:
        expr = parse_expr(text, local_dict=dict(ALLOWED_NAMES), transformations=_TRANSFORMATIONS)
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as e:
        raise ExpressionError(f"cannot parse expression {text!r}: {e}") from e
    if not isinstance(expr, sympy.Expr) or expr.free_symbols - {X}:
        raise ExpressionError(f"expression {text!r} must be a real function of x")
    return expr


def compile_expression(expr: sympy.Expr) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized numpy callable of a sympy expression in x."""
    func = sympy.lambdify(X, expr, modules="numpy")

    def evaluate(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            values = np.asarray(func(x), dtype=float)
        return np.broadcast_to(values, x.shape).copy()

    return evaluate


def derivative_callables(expr: sympy.Expr, order: int) -> List[Callable[[np.ndarray], np.ndarray]]:
    """Callables of the first `order` derivatives of expr."""
    out = []
    current = expr
    for _ in range(order):
        current = sympy.diff(current, X)
        out.append(compile_expression(current))
    return out


def expression_function(
    text_or_expr,
    domain: Tuple[float, float] = (0.0, 1.0),
    level: int = DEFAULT_GRID_LEVEL,
    order: int = 0,
) -> GridFunction:
    """Sample an expression on the grid with an exact derivative stack up to `order`.

    Derivatives that do not evaluate to finite samples (abs at its kink, for
    example) are left out; callers then fall back to finite differences.
    """
    expr = parse_expression(text_or_expr) if isinstance(text_or_expr, str) else text_or_expr
    nodes = grid_nodes(domain, level)
    values = compile_expression(expr)(nodes)
    if not np.all(np.isfinite(values)):
        raise ExpressionError(f"expression {expr} is not finite on {domain}")

    stack: List[np.ndarray] = []
    for r, func in enumerate(_safe_derivatives(expr, order), start=1):
        try:
            samples = func(nodes)
        except (NameError, TypeError, ValueError):
            samples = None
        if samples is None or not np.all(np.isfinite(samples)):
            logger.warning("derivative %d of %s is not finite on the grid; using finite differences", r, expr)
            break
        stack.append(samples)
    return GridFunction(domain, values, stack)


def _safe_derivatives(expr: sympy.Expr, order: int) -> List[Callable[[np.ndarray], np.ndarray]]:
    try:
        return derivative_callables(expr, order)
    except (TypeError, NameError, ValueError) as e:
        logger.warning("cannot differentiate %s symbolically: %s", expr, e)
        return []
