"""
The fractal operator F^alpha: f -> f^alpha with base b = Lf.

F^alpha is linear and bounded with ||F^alpha|| <= 1 + K/(1-K) ||I_d - L||.
It is bounded below when K < min(1, 1/||L||), and when K (1 + ||I_d - L||) < 1
it is an automorphism whose inverse is the Neumann series of I_d - F^alpha.
"""
import logging
import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..engine.rb_operator import RBOperator
from ..exceptions import HypothesisViolated, MaxTermsExceeded, NotContractive
from ..grid.grid_function import GridFunction
from ..models.partition import Partition
from ..models.reports import (
    AutomorphismReport,
    BoundedBelowReport,
    ContractionReport,
    NeumannResult,
    PerturbationReport,
)
from ..models.scaling import ScalingProfile
from ..models.settings import (
    DEFAULT_ENDPOINT_TOL,
    DEFAULT_GRID_LEVEL,
    DEFAULT_HOELDER_SUBSAMPLE,
    DEFAULT_MAX_ITER,
    DEFAULT_NEUMANN_MAX_TERMS,
    DEFAULT_NEUMANN_TOL,
    DEFAULT_SEED,
    DEFAULT_TOL,
)
from ..models.space import SpaceSpec
from ..models.spec import BaseRule, IfsSpec
from ..norms.contraction import space_contraction
from ..norms.spaces import norm
from .base_operators import LinearBaseOperator
from .sampling import random_test_function

logger = logging.getLogger(__name__)

BOUND_SLACK = 1e-6
# Relative allowance for quadrature of composed functions, which differs from the
# quadrature of the original at O(h^2) on the same grid.
QUADRATURE_RTOL = 1e-3


class FractalTemplate(BaseModel):
    """Everything F^alpha needs except the function it acts on."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    partition: Partition = Field(..., description="Knots of the interval")
    scaling: ScalingProfile = Field(..., description="Scale vector")
    base_operator: LinearBaseOperator = Field(..., description="Linear base operator L")
    space: SpaceSpec = Field(default_factory=SpaceSpec.bounded, description="Space of the estimates")
    grid_level: int = Field(DEFAULT_GRID_LEVEL, ge=1, description="Grid level of sampled functions")
    tol: float = Field(DEFAULT_TOL, gt=0, description="Relative fixed-point tolerance")
    max_iter: int = Field(DEFAULT_MAX_ITER, ge=1, description="Fixed-point iteration cap")
    endpoint_tol: float = Field(DEFAULT_ENDPOINT_TOL, gt=0, description="Endpoint-match tolerance")
    hoelder_subsample: int = Field(DEFAULT_HOELDER_SUBSAMPLE, ge=2, description="Hoelder scan size")

    def spec_for(self, f: GridFunction) -> IfsSpec:
        return IfsSpec(
            partition=self.partition,
            scaling=self.scaling,
            seed=f,
            base=BaseRule.from_operator(self.base_operator),
            space=self.space,
        )

    def with_space(self, space: SpaceSpec) -> "FractalTemplate":
        return self.model_copy(update={"space": space})

    def with_scaling(self, scaling: ScalingProfile) -> "FractalTemplate":
        return self.model_copy(update={"scaling": scaling})

    def contraction(self, space: Optional[SpaceSpec] = None) -> ContractionReport:
        return space_contraction(self.partition, self.scaling, space or self.space)

    @property
    def K(self) -> float:
        return self.contraction().factor

    @property
    def norm_L(self) -> float:
        return self.base_operator.norm_bound(self.space)

    @property
    def deviation_L(self) -> float:
        return self.base_operator.deviation_bound(self.space)

    @property
    def automorphism_condition(self) -> float:
        """K (1 + ||I_d - L||), below one when F^alpha is a Neumann-invertible automorphism."""
        return self.K * (1.0 + self.deviation_L)

    def norm(self, g: GridFunction, space: Optional[SpaceSpec] = None) -> float:
        return norm(space or self.space, g, self.hoelder_subsample)

    def random_function(self, rng: np.random.Generator, vanish_order: int = 0) -> GridFunction:
        return random_test_function(
            rng, self.partition.domain, self.grid_level, vanish_order, self.space.requires_derivatives
        )

    def describe(self) -> dict:
        return {
            "knots": list(self.partition.knots),
            "scaling": [e.value if e.kind == "const" else "sampled" for e in self.scaling.entries],
            "space": self.space.label,
            **self.base_operator.describe(self.space),
        }


def _require_contractive(template: FractalTemplate) -> ContractionReport:
    report = template.contraction()
    if not report.contractive:
        raise NotContractive(f"{report.condition_text} fails in {template.space.label}", report)
    return report


def _ratio(K: float) -> float:
    return K / (1.0 - K) if K < 1.0 else math.inf


def _within(lhs: float, bound: float, slack: float) -> bool:
    return lhs <= bound * (1.0 + QUADRATURE_RTOL) + slack


def _product(a: float, b: float) -> float:
    """a * b with 0 * inf = 0."""
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def falpha_operator(template: FractalTemplate, f: GridFunction) -> GridFunction:
    """F^alpha f, the fixed point with b = Lf."""
    _require_contractive(template)
    scale = f.sup_norm()
    tol = template.tol * scale if scale > 0.0 else template.tol
    rb = RBOperator(template.spec_for(f), template.endpoint_tol)
    return rb.fixed_point(tol, template.max_iter).falpha


def perturbation_bounds(template: FractalTemplate, f: GridFunction, slack: float = BOUND_SLACK) -> PerturbationReport:
    """||f^alpha - f|| against K ||f^alpha - b|| and K/(1-K) ||I_d - L|| ||f||, in the space and in sup norm."""
    K = _require_contractive(template).factor
    falpha = falpha_operator(template, f)
    b = template.base_operator.apply(f)
    norm_L, deviation_L = template.norm_L, template.deviation_L

    lhs = template.norm(falpha - f)
    bound_prop = K * template.norm(falpha - b)
    bound_thm = _product(_ratio(K), _product(deviation_L, template.norm(f)))
    bound_thm_sharp = _ratio(K) * template.norm(f - b)

    bounded = SpaceSpec.bounded()
    sup_K = template.contraction(bounded).factor
    sup_lhs = (falpha - f).sup_norm()
    sup_bound_prop = sup_K * (falpha - b).sup_norm()
    sup_bound_thm = _product(_ratio(sup_K), _product(template.base_operator.deviation_bound(bounded), f.sup_norm()))
    sup_bound_thm_sharp = _product(_ratio(sup_K), (f - b).sup_norm())

    report = PerturbationReport(
        space=template.space.label,
        K=K,
        norm_L=norm_L,
        deviation_L=deviation_L,
        lhs=lhs,
        bound_prop=bound_prop,
        bound_thm=bound_thm,
        bound_thm_sharp=bound_thm_sharp,
        satisfied_prop=_within(lhs, bound_prop, slack),
        satisfied_thm=_within(lhs, bound_thm, slack) and _within(lhs, bound_thm_sharp, slack),
        sup_K=sup_K,
        sup_lhs=sup_lhs,
        sup_bound_prop=sup_bound_prop,
        sup_bound_thm=sup_bound_thm,
        sup_bound_thm_sharp=sup_bound_thm_sharp,
        sup_satisfied=(
            sup_lhs <= sup_bound_prop + slack
            and sup_lhs <= sup_bound_thm + slack
            and sup_lhs <= sup_bound_thm_sharp + slack
        ),
    )
    if not report.satisfied:
        logger.warning("perturbation bounds fail in %s: lhs %.6g", template.space.label, lhs)
    return report


def operator_norm_upper_bound(template: FractalTemplate) -> float:
    """1 + K/(1-K) ||I_d - L||."""
    K = template.K
    return 1.0 + _product(_ratio(K), template.deviation_L)


def deviation_norm_upper_bound(template: FractalTemplate) -> float:
    """K/(1-K) ||I_d - L||, the bound of ||I_d - F^alpha||."""
    return _product(_ratio(template.K), template.deviation_L)


def _max_ratio(template: FractalTemplate, trials: int, seed: int, numerator) -> float:
    _require_contractive(template)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(max(trials, 0)):
        f = template.random_function(rng)
        size = template.norm(f)
        if size == 0.0:
            continue
        best = max(best, template.norm(numerator(f)) / size)
    return best


def operator_norm_lower_bound(template: FractalTemplate, trials: int, seed: int = DEFAULT_SEED) -> float:
    """max over random f of ||F^alpha f|| / ||f||; 0 for no trials."""
    return _max_ratio(template, trials, seed, lambda f: falpha_operator(template, f))


def deviation_norm_lower_bound(template: FractalTemplate, trials: int, seed: int = DEFAULT_SEED) -> float:
    """max over random f of ||f - F^alpha f|| / ||f||."""
    return _max_ratio(template, trials, seed, lambda f: f - falpha_operator(template, f))


def base_operator_norm_lower_bound(template: FractalTemplate, trials: int, seed: int = DEFAULT_SEED) -> float:
    """max over random f of ||L f|| / ||f||, never above the supplied ||L|| bound for a correct bound."""
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(max(trials, 0)):
        f = template.random_function(rng)
        size = template.norm(f)
        if size > 0.0:
            best = max(best, template.norm(template.base_operator.apply(f)) / size)
    return best


def bounded_below_check(template: FractalTemplate, f: GridFunction, slack: float = BOUND_SLACK) -> BoundedBelowReport:
    """||f|| <= (1+K)/(1-K||L||) ||F^alpha f|| under K < min(1, 1/||L||)."""
    K = _require_contractive(template).factor
    norm_L = template.norm_L
    applicable = K < 1.0 and _product(K, norm_L) < 1.0
    constant = (1.0 + K) / (1.0 - _product(K, norm_L)) if applicable else None
    norm_f = template.norm(f)
    norm_image = template.norm(falpha_operator(template, f))
    satisfied = applicable and norm_f <= constant * norm_image + slack
    return BoundedBelowReport(
        space=template.space.label,
        K=K,
        norm_L=norm_L,
        applicable=applicable,
        constant=constant,
        norm_f=norm_f,
        norm_image=norm_image,
        satisfied=satisfied,
    )


def automorphism_bounds(template: FractalTemplate, f: GridFunction, slack: float = BOUND_SLACK) -> AutomorphismReport:
    """((1-K||L||)/(1+K)) ||f|| <= ||F^alpha f|| <= (1 + K/(1-K) ||I_d-L||) ||f||."""
    K = _require_contractive(template).factor
    norm_L, deviation_L = template.norm_L, template.deviation_L
    applicable = template.automorphism_condition < 1.0
    lower = (1.0 - _product(K, norm_L)) / (1.0 + K)
    upper = operator_norm_upper_bound(template)
    norm_f = template.norm(f)
    norm_image = template.norm(falpha_operator(template, f))
    satisfied = applicable and lower * norm_f <= norm_image + slack and norm_image <= upper * norm_f + slack
    return AutomorphismReport(
        space=template.space.label,
        K=K,
        norm_L=norm_L,
        deviation_L=deviation_L,
        applicable=applicable,
        lower_constant=lower,
        upper_constant=upper,
        norm_f=norm_f,
        norm_image=norm_image,
        satisfied=satisfied,
    )


def neumann_expansion(
    template: FractalTemplate,
    g: GridFunction,
    tol: float = DEFAULT_NEUMANN_TOL,
    max_terms: int = DEFAULT_NEUMANN_MAX_TERMS,
) -> NeumannResult:
    """sum_j (I_d - F^alpha)^j g, stopped once a term's space norm is <= tol."""
    condition = template.automorphism_condition
    if not condition < 1.0:
        raise HypothesisViolated(
            f"K (1 + ||I_d - L||) = {condition:.6g} is not below 1 in {template.space.label}"
        )
    term = g.without_derivatives()
    total = term
    term_norms = [template.norm(term)]
    if term_norms[0] <= tol:
        return NeumannResult(inverse=total, terms=0, last_term_norm=term_norms[0], term_norms=term_norms)
    for j in range(1, max_terms + 1):
        term = term - falpha_operator(template, term)
        total = total + term
        size = template.norm(term)
        term_norms.append(size)
        logger.debug("neumann term %d: norm %.3e", j, size)
        if size <= tol:
            logger.info("neumann series converged after %d terms", j)
            return NeumannResult(inverse=total, terms=j, last_term_norm=size, term_norms=term_norms)
    raise MaxTermsExceeded(f"neumann series did not reach {tol:g} in {max_terms} terms (last {term_norms[-1]:.3e})")


def neumann_inverse(
    template: FractalTemplate,
    g: GridFunction,
    tol: float = DEFAULT_NEUMANN_TOL,
    max_terms: int = DEFAULT_NEUMANN_MAX_TERMS,
) -> GridFunction:
    """(F^alpha)^{-1} g by the Neumann series."""
    return neumann_expansion(template, g, tol, max_terms).inverse
