"""
Random-iteration sampling of the graph attractor.

w_i(x, y) = (L_i(x), alpha_i(x) y + f(L_i(x)) - alpha_i(x) b(x)); the union
of the images of the graph of f^alpha under the w_i is the graph itself.
"""
import logging

import numpy as np

from ..exceptions import NotContractive
from ..models.settings import DEFAULT_BURN_IN, DEFAULT_SEED
from ..models.spec import IfsSpec
from ..norms.contraction import contraction_factor
from .rb_operator import RBOperator

logger = logging.getLogger(__name__)


def chaos_game(
    spec: IfsSpec,
    n_points: int,
    seed: int = DEFAULT_SEED,
    burn_in: int = DEFAULT_BURN_IN,
) -> np.ndarray:
    """n_points x 2 array of attractor points after the burn-in, maps chosen uniformly."""
    report = contraction_factor(spec)
    if not report.contractive:
        raise NotContractive(f"{report.condition_text} fails in {spec.space.label}", report)
    rb = RBOperator(spec)
    if n_points <= 0:
        return np.empty((0, 2))

    partition = rb.partition
    a, d = partition.ratios, partition.intercepts
    rng = np.random.default_rng(seed)
    total = burn_in + n_points
    choice = rng.integers(0, partition.n_intervals, size=total)

    x = np.empty(total + 1)
    x[0] = partition.domain[0]
    for t in range(total):
        x[t + 1] = a[choice[t]] * x[t] + d[choice[t]]
    lo, hi = partition.domain
    np.clip(x, lo, hi, out=x)

    scale = spec.scaling.evaluate(choice, x[:-1])
    shift = np.asarray(rb.seed.eval(x[1:])) - scale * np.asarray(rb.base.eval(x[:-1]))

    y = np.empty(total + 1)
    y[0] = rb.seed.samples[0]
    for t in range(total):
        y[t + 1] = scale[t] * y[t] + shift[t]

    logger.info("chaos game: %d points after %d burn-in steps", n_points, burn_in)
    return np.column_stack((x[burn_in + 1:], y[burn_in + 1:]))
