"""
Closed-form contraction factors of the RB operator, one per space.

  Bounded, Lp(inf)   max_i ||alpha_i||_inf
  Lp, 1 <= p < inf   (sum_i a_i ||alpha_i||_inf^p)^(1/p)
  Lp, 0 < p < 1      sum_i a_i ||alpha_i||_inf^p          (metric ||.||_p^p)
  Ck                 max_i (2/a_i)^k ||alpha_i||_{C^k}, plus ||alpha_i||_{C^k} <= (a_i/2)^k
  Sobolev, p < inf   (sum_i |alpha_i|^p / a_i^(kp-1))^(1/p)
  Sobolev, p = inf   max_i |alpha_i| / a_i^k
  Hoelder            max_i |alpha_i| / a_i^(sigma+k)
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from ..exceptions import IncompatibleScalingKind, UnsupportedOrder
from ..grid.grid_function import GridFunction
from ..models.partition import Partition
from ..models.reports import ContractionReport
from ..models.scaling import ScalingProfile
from ..models.space import MAX_SPACE_ORDER, SpaceSpec
from ..models.spec import IfsSpec
from .spaces import metric_size

logger = logging.getLogger(__name__)


def space_contraction(partition: Partition, scaling: ScalingProfile, space: SpaceSpec) -> ContractionReport:
    """Contraction report for a partition and scaling in a space."""
    if space.requires_derivatives > MAX_SPACE_ORDER:
        raise UnsupportedOrder(f"derivative order {space.requires_derivatives} exceeds {MAX_SPACE_ORDER}")
    if space.requires_constant_scaling and not scaling.is_constant:
        raise IncompatibleScalingKind(f"{space.label} requires constant scaling")

    a = partition.ratios
    k = space.k
    hypothesis: Optional[bool] = None
    margins: Optional[List[float]] = None

    if space.kind == "bounded" or (space.kind == "lp" and math.isinf(space.p)):
        factor = float(np.max(scaling.sup_magnitudes))
        condition = "max_i ||alpha_i||_inf"
    elif space.kind == "lp" and space.p >= 1:
        p = space.p
        factor = float(np.sum(a * scaling.sup_magnitudes ** p) ** (1.0 / p))
        condition = f"[sum_i a_i ||alpha_i||_inf^{_fmt(p)}]^(1/{_fmt(p)})"
    elif space.kind == "lp":
        p = space.p
        factor = float(np.sum(a * scaling.sup_magnitudes ** p))
        condition = f"sum_i a_i ||alpha_i||_inf^{_fmt(p)}"
    elif space.kind == "ck":
        norms = scaling.ck_norms(k)
        factor = float(np.max((2.0 / a) ** k * norms))
        margin = (a / 2.0) ** k - norms
        margins = [float(m) for m in margin]
        hypothesis = bool(np.all(margin >= 0.0))
        condition = f"max_i (2/a_i)^{k} ||alpha_i||_C^{k}"
    elif space.kind == "sobolev":
        alpha = np.abs(scaling.values)
        if math.isinf(space.p):
            factor = float(np.max(alpha / a ** k))
            condition = f"max_i |alpha_i| / a_i^{k}"
        else:
            p = space.p
            factor = float(np.sum(alpha ** p / a ** (k * p - 1.0)) ** (1.0 / p))
            condition = f"[sum_i |alpha_i|^{_fmt(p)} / a_i^{_fmt(k * p - 1.0)}]^(1/{_fmt(p)})"
    else:
        alpha = np.abs(scaling.values)
        factor = float(np.max(alpha / a ** (space.sigma + k)))
        condition = f"max_i |alpha_i| / a_i^{_fmt(space.sigma + k)}"

    satisfied = factor < 1.0 and hypothesis is not False
    report = ContractionReport(
        space=space,
        factor=factor,
        condition_text=f"{condition} = {factor:.6g} < 1",
        satisfied=satisfied,
        hypothesis_satisfied=hypothesis,
        hypothesis_margins=margins,
    )
    logger.debug("contraction in %s: %s (satisfied=%s)", space.label, report.condition_text, satisfied)
    return report


def contraction_factor(spec: IfsSpec) -> ContractionReport:
    """Contraction report of the spec's own space."""
    return space_contraction(spec.partition, spec.scaling, spec.space)


def seminorm_contraction(spec: IfsSpec) -> float:
    """max_i |alpha_i| / a_i^(k+sigma), the factor acting on [g^(k)]_sigma."""
    if spec.space.kind != "hoelder":
        raise IncompatibleScalingKind("the seminorm factor is defined for Hoelder spaces")
    return space_contraction(spec.partition, spec.scaling, spec.space).factor


def empirical_contraction(
    spec: IfsSpec,
    pairs: List[Tuple[GridFunction, GridFunction]],
) -> float:
    """Largest observed size(T g1 - T g2) / size(g1 - g2) in the spec's space."""
    from ..engine.rb_operator import RBOperator

    rb = RBOperator(spec)
    worst = 0.0
    for g1, g2 in pairs:
        below = metric_size(spec.space, g1 - g2)
        if below == 0.0:
            continue
        above = metric_size(spec.space, rb.apply(g1) - rb.apply(g2))
        worst = max(worst, above / below)
    return worst


def _fmt(value: float) -> str:
    return format(value, "g")
