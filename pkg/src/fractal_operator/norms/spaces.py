"""
Norms and seminorms of the five function spaces on grid functions.
"""
import logging
import math

import numpy as np

from ..exceptions import SpecInvalid, UnsupportedOrder
from ..grid.grid_function import GridFunction, quadrature_p_power
from ..models.settings import DEFAULT_HOELDER_SUBSAMPLE
from ..models.space import MAX_SPACE_ORDER, SpaceSpec

logger = logging.getLogger(__name__)


def lp_norm(g: GridFunction, p: float) -> float:
    """[integral |g|^p]^(1/p); ess-sup for p = inf."""
    if math.isinf(p):
        return g.sup_norm()
    return quadrature_p_power(g, p) ** (1.0 / p)


def hoelder_seminorm(g: GridFunction, sigma: float, subsample: int = DEFAULT_HOELDER_SUBSAMPLE) -> float:
    """Largest difference quotient |g(x)-g(y)|/|x-y|^sigma over a subsampled node set.

    A lower bound of the true seminorm; all nodes are used when the grid has
    at most `subsample` of them.
    """
    if not 0 < sigma <= 1:
        raise SpecInvalid(f"Hoelder exponent must lie in (0, 1], got {sigma}")
    count = min(max(int(subsample), 2), g.size)
    idx = np.unique(np.rint(np.linspace(0, g.size - 1, count)).astype(int))
    x = g.nodes[idx]
    y = g.samples[idx]
    dx = np.abs(np.subtract.outer(x, x))
    dy = np.abs(np.subtract.outer(y, y))
    upper = np.triu_indices(idx.size, k=1)
    quotients = dy[upper] / dx[upper] ** sigma
    return float(np.max(quotients)) if quotients.size else 0.0


def norm(space: SpaceSpec, g: GridFunction, subsample: int = DEFAULT_HOELDER_SUBSAMPLE) -> float:
    """Norm of g in the space (quasi-norm with root for Lp, p < 1)."""
    k = space.requires_derivatives
    if k > MAX_SPACE_ORDER:
        raise UnsupportedOrder(f"derivative order {k} exceeds {MAX_SPACE_ORDER}")

    if space.kind == "bounded":
        return g.sup_norm()
    if space.kind == "lp":
        return lp_norm(g, space.p)
    if space.kind == "ck":
        return max(g.derivative(r).sup_norm() for r in range(k + 1))
    if space.kind == "sobolev":
        if math.isinf(space.p):
            return sum(g.derivative(j).sup_norm() for j in range(k + 1))
        p = space.p
        return sum(quadrature_p_power(g.derivative(j), p) for j in range(k + 1)) ** (1.0 / p)
    top = g.derivative(k)
    return sum(g.derivative(j).sup_norm() for j in range(k + 1)) + hoelder_seminorm(top, space.sigma, subsample)


def metric_size(space: SpaceSpec, g: GridFunction, subsample: int = DEFAULT_HOELDER_SUBSAMPLE) -> float:
    """Size in which the space's contraction factor is stated: ||g||_p^p for Lp with p < 1, else the norm."""
    value = norm(space, g, subsample)
    if space.is_quasi_norm:
        return value ** space.p
    return value
