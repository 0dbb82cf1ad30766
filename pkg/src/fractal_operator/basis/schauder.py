"""
Schauder bases by repeated integration and their fractal counterparts.

Level 0 is the L2-normalized Haar system on [0, 1]. Level k+1 starts with the
constant 1 and continues with the running integrals of the level-k elements;
its coefficient functionals are beta_1(f) = f(0) and beta_n(f) = beta_{n-1}(f').

On the grid, Haar elements are sampled right-continuously and the level-0
functionals are left cell sums, so the sampled system is orthonormal. Level-0
elements are lifted with exact left sums, higher levels with the cumulative
trapezoid. Derivatives inside the functionals are forward differences, which
telescope against the left sums: levels 0 and 1 are biorthogonal up to
rounding, higher levels up to O(h).
"""
import logging
import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..exceptions import HypothesisViolated, SpecInvalid
from ..grid.grid_function import GridFunction, finite_difference, grid_nodes
from ..models.reports import Reconstruction
from ..models.settings import DEFAULT_GRID_LEVEL, DEFAULT_NEUMANN_MAX_TERMS, DEFAULT_NEUMANN_TOL
from ..models.space import SpaceSpec
from ..norms.spaces import norm
from ..operators.fractal_operator import FractalTemplate, falpha_operator, neumann_inverse

logger = logging.getLogger(__name__)

GRAM_WINDOW = 16
UNIT_DOMAIN = (0.0, 1.0)


class BasisLadder(BaseModel):
    """Elements f_n^k of one ladder level and their coefficient functionals."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    level: int = Field(..., ge=0, description="Ladder level k")
    elements: List[GridFunction] = Field(..., min_length=1, description="f_1^k, f_2^k, ...")
    lower: Optional["BasisLadder"] = Field(None, description="Level k-1 ladder the elements were lifted from")
    gram_condition: float = Field(..., description="Condition number of the Gram matrix of the first elements")

    @property
    def count(self) -> int:
        return len(self.elements)

    @property
    def domain(self):
        return self.elements[0].domain

    def coefficients(self, f: GridFunction, count: Optional[int] = None) -> np.ndarray:
        """beta_1^k(f), ..., beta_count^k(f)."""
        n = self.count if count is None else min(count, self.count)
        if n <= 0:
            return np.zeros(0)
        if not f.same_grid(self.elements[0]):
            raise SpecInvalid("function and basis live on different grids")
        if self.level == 0:
            matrix = np.vstack([e.samples[:-1] for e in self.elements[:n]])
            return matrix @ f.samples[:-1] * f.h
        head = np.array([f.samples[0]])
        if n == 1:
            return head
        slope = finite_difference(f, 1, scheme="forward")
        return np.concatenate((head, self.lower.coefficients(slope, n - 1)))

    def coefficient(self, n: int, f: GridFunction) -> float:
        """beta_n^k(f), 1-based."""
        if not 1 <= n <= self.count:
            raise SpecInvalid(f"coefficient index {n} outside 1..{self.count}")
        return float(self.coefficients(f, n)[n - 1])


BasisLadder.model_rebuild()


def gram_condition(elements: List[GridFunction]) -> float:
    window = elements[:GRAM_WINDOW]
    matrix = np.vstack([e.samples for e in window])
    h = window[0].h
    weights = np.full(matrix.shape[1], h)
    weights[[0, -1]] = h / 2.0
    gram = (matrix * weights) @ matrix.T
    return float(np.linalg.cond(gram))


def haar_element(n: int, nodes: np.ndarray) -> np.ndarray:
    """n-th L2-normalized Haar function (1-based, natural order), right-continuous, left limit at 1."""
    if n == 1:
        return np.ones(nodes.size)
    m = n - 2
    level = int(math.floor(math.log2(m + 1)))
    shift = m + 1 - 2 ** level
    width = 2.0 ** -level
    start, mid, end = shift * width, (shift + 0.5) * width, (shift + 1) * width
    height = 2.0 ** (level / 2.0)
    values = np.where((nodes >= start) & (nodes < mid), height, 0.0)
    values = np.where((nodes >= mid) & (nodes < end), -height, values)
    if end == 1.0:
        values[-1] = -height
    return values


def haar_system(count: int, domain=UNIT_DOMAIN, level: int = DEFAULT_GRID_LEVEL) -> BasisLadder:
    """First `count` elements of the Haar system: 1, h_{0,0}, h_{1,0}, h_{1,1}, ..."""
    if tuple(float(v) for v in domain) != UNIT_DOMAIN:
        raise SpecInvalid(f"the Haar system is built on [0, 1], not {domain}")
    if count < 1:
        raise SpecInvalid("a basis needs at least one element")
    if count > 2 ** level:
        raise SpecInvalid(f"{count} Haar elements exceed the resolution of a level-{level} grid")
    nodes = grid_nodes(UNIT_DOMAIN, level)
    elements = [GridFunction(UNIT_DOMAIN, haar_element(n, nodes)) for n in range(1, count + 1)]
    return BasisLadder(level=0, elements=elements, gram_condition=gram_condition(elements))


def lift_ladder(ladder: BasisLadder, count: Optional[int] = None) -> BasisLadder:
    """Level k+1: the constant 1 followed by running integrals of the level-k elements."""
    n = ladder.count + 1 if count is None else count
    if n < 1:
        raise SpecInvalid("a basis needs at least one element")
    if n - 1 > ladder.count:
        raise SpecInvalid(f"lifting to {n} elements needs {n - 1} lower elements, got {ladder.count}")
    rule = "left" if ladder.level == 0 else "trapezoid"
    first = ladder.elements[0]
    elements = [GridFunction.constant(1.0, first.domain, int(round(math.log2(first.size - 1))))]
    elements.extend(e.running_integral(rule).without_derivatives() for e in ladder.elements[: n - 1])
    return BasisLadder(
        level=ladder.level + 1,
        elements=elements,
        lower=ladder,
        gram_condition=gram_condition(elements),
    )


def build_ladder(level: int, count: int, grid_level: int = DEFAULT_GRID_LEVEL) -> BasisLadder:
    """Level-`level` ladder with `count` elements, lifted from the Haar system."""
    if count <= level:
        raise SpecInvalid(f"a level-{level} ladder needs more than {level} elements")
    ladder = haar_system(count - level, UNIT_DOMAIN, grid_level)
    for step in range(level):
        ladder = lift_ladder(ladder, count - level + step + 1)
    return ladder


def ladder_level_for(space: SpaceSpec) -> int:
    """Ladder level matching a space: k for Sobolev, 0 for Lp."""
    if space.kind in ("sobolev", "lp") and not 1 <= space.p < math.inf:
        raise SpecInvalid(f"Schauder ladders need 1 <= p < inf, not {space.label}")
    return space.k if space.kind == "sobolev" else 0


class FractalBasis(BaseModel):
    """Ladder, template and the self-referential elements F^alpha f_n."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    ladder: BasisLadder
    template: FractalTemplate
    elements: List[GridFunction]

    @property
    def count(self) -> int:
        return len(self.elements)

    def partial_sum(self, coefficients: np.ndarray) -> GridFunction:
        """sum_n c_n f_n^alpha over the leading elements."""
        values = np.zeros(self.elements[0].size)
        for c, e in zip(coefficients, self.elements):
            values = values + c * e.samples
        return self.elements[0].with_samples(values)


def _require_automorphism(template: FractalTemplate) -> None:
    condition = template.automorphism_condition
    if not condition < 1.0:
        raise HypothesisViolated(
            f"K (1 + ||I_d - L||) = {condition:.6g} is not below 1 in {template.space.label}"
        )


def fractalize_basis(ladder: BasisLadder, template: FractalTemplate) -> FractalBasis:
    """F^alpha applied to every ladder element."""
    _require_automorphism(template)
    elements = [falpha_operator(template, e) for e in ladder.elements]
    logger.info("fractalized %d level-%d elements in %s", len(elements), ladder.level, template.space.label)
    return FractalBasis(ladder=ladder, template=template, elements=elements)


def reconstruct(
    fbasis: FractalBasis,
    f: GridFunction,
    n_terms: int,
    space: Optional[SpaceSpec] = None,
    tol: float = DEFAULT_NEUMANN_TOL,
    max_terms: int = DEFAULT_NEUMANN_MAX_TERMS,
) -> Reconstruction:
    """sum_{n <= n_terms} beta_n((F^alpha)^{-1} f) f_n^alpha with the error after each term."""
    template = fbasis.template
    _require_automorphism(template)
    if not 1 <= n_terms <= fbasis.count:
        raise SpecInvalid(f"n_terms must lie in 1..{fbasis.count}, got {n_terms}")
    measure = space or template.space

    h = neumann_inverse(template, f, tol, max_terms)
    coefficients = fbasis.ladder.coefficients(h, n_terms)
    target = f.without_derivatives()
    errors = [
        norm(measure, target - fbasis.partial_sum(coefficients[:n]), template.hoelder_subsample)
        for n in range(1, n_terms + 1)
    ]
    return Reconstruction(
        approximation=fbasis.partial_sum(coefficients),
        coefficients=coefficients,
        errors=errors,
        space=measure.label,
    )
