"""
Seeded random test functions for operator-norm estimates and bound sweeps.

Family on t = (x - lo)/(hi - lo): 1, t, t^2, sin(pi n t) for n <= 4, with
coefficients drawn from U[-1, 1]. With vanish_order = m the combination is
multiplied by (t(1-t))^m, so it and its first m-1 derivatives vanish at
both ends.
"""
from typing import Optional, Tuple

import numpy as np
import sympy

from ..extractors.expressions import X, expression_function
from ..grid.grid_function import GridFunction
from ..models.settings import DEFAULT_GRID_LEVEL

FAMILY_SIZE = 7


def random_expression(
    rng: np.random.Generator,
    domain: Tuple[float, float] = (0.0, 1.0),
    vanish_order: int = 0,
) -> sympy.Expr:
    lo, hi = float(domain[0]), float(domain[1])
    t = (X - lo) / (hi - lo)
    family = [sympy.Integer(1), t, t ** 2] + [sympy.sin(sympy.pi * n * t) for n in range(1, 5)]
    coefficients = rng.uniform(-1.0, 1.0, size=FAMILY_SIZE)
    expr = sum(sympy.Float(float(c)) * term for c, term in zip(coefficients, family))
    if vanish_order > 0:
        expr = expr * (t * (1 - t)) ** vanish_order
    return expr


def random_test_function(
    rng: np.random.Generator,
    domain: Tuple[float, float] = (0.0, 1.0),
    level: int = DEFAULT_GRID_LEVEL,
    vanish_order: int = 0,
    order: Optional[int] = None,
) -> GridFunction:
    """One random test function with an exact derivative stack up to `order`."""
    expr = random_expression(rng, domain, vanish_order)
    return expression_function(expr, domain, level, order or 0)
