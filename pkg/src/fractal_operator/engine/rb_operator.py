"""
Read-Bajraktarevic operator on a uniform grid.

For a node x in subinterval i with u = L_i^{-1}(x),

    (T g)(x) = f(x) + alpha_i(u) (g - b)(u),

and the alpha-fractal function f^alpha is the fixed point of T.
"""
import logging
from math import comb
from typing import List, Optional

import numpy as np

from ..core.ifs import FD_ENDPOINT_TOL, derivative_endpoint_mismatch, snap_partition, validate_spec
from ..exceptions import HypothesisViolated, MaxIterExceeded, NotContractive, SpecInvalid
from ..grid.grid_function import GridFunction
from ..models.reports import FixedPointResult, ValidationReport
from ..models.settings import DEFAULT_ENDPOINT_TOL, DEFAULT_MAX_ITER, DEFAULT_TOL
from ..models.spec import IfsSpec
from ..norms.contraction import contraction_factor

logger = logging.getLogger(__name__)

# Residual ratios are only observed while the previous residual is above this, relative to ||f||_inf.
RATIO_FLOOR = 1e-10


class RBOperator:
    """T for one spec, with the per-node subinterval data precomputed."""

    def __init__(self, spec: IfsSpec, endpoint_tol: float = DEFAULT_ENDPOINT_TOL):
        report = validate_spec(spec, endpoint_tol)
        if report.blocking_failures:
            names = ", ".join(c.name for c in report.blocking_failures)
            raise SpecInvalid(f"spec fails blocking checks: {names}", report)

        self.spec = spec
        self.report: ValidationReport = report
        self.endpoint_tol = endpoint_tol
        self.seed = spec.seed
        self.base = spec.base.resolve(spec.seed)

        # Knots move to their nearest grid nodes.
        self.partition, self.snap_error = snap_partition(spec.partition, self.seed)
        if self.snap_error > 0.0:
            logger.warning("knots are not grid nodes; snapped by up to %.3g", self.snap_error)
        partition = self.partition
        nodes = self.seed.nodes
        self.index = partition.subinterval_index(nodes)
        a = partition.ratios[self.index]
        d = partition.intercepts[self.index]
        lo, hi = partition.domain
        self.u = np.clip((nodes - d) / a, lo, hi)
        self.alpha_u = spec.scaling.evaluate(self.index, self.u)
        self.base_u = np.asarray(self.base.eval(self.u))

    @property
    def knots(self) -> np.ndarray:
        """Knots the operator works with, on the grid."""
        return np.asarray(self.partition.knots)

    def apply(self, g: GridFunction) -> GridFunction:
        """T g sampled on the grid."""
        if not g.same_grid(self.seed):
            raise SpecInvalid("g must live on the seed's grid")
        values = self.seed.samples + self.alpha_u * (np.asarray(g.eval(self.u)) - self.base_u)
        return self.seed.with_samples(values)

    def self_ref_residual(self, candidate: GridFunction) -> float:
        """max |c(x) - (T c)(x)| over the nodes."""
        return float(np.max(np.abs(candidate.samples - self.apply(candidate).samples)))

    def fixed_point(
        self,
        tol: float = DEFAULT_TOL,
        max_iter: int = DEFAULT_MAX_ITER,
        initial: Optional[GridFunction] = None,
    ) -> FixedPointResult:
        """Iterate g_{n+1} = T g_n from g_0 = f (or `initial`) until the sup residual <= tol."""
        report = contraction_factor(self.spec)
        if not report.contractive:
            raise NotContractive(f"{report.condition_text} fails in {self.spec.space.label}", report)

        g = (initial if initial is not None else self.seed).without_derivatives()
        floor = RATIO_FLOOR * max(self.seed.sup_norm(), 1.0)
        residuals: List[float] = []
        for n in range(1, max_iter + 1):
            nxt = self.apply(g)
            residual = float(np.max(np.abs(nxt.samples - g.samples)))
            residuals.append(residual)
            g = nxt
            logger.debug("iteration %d: residual %.3e", n, residual)
            if residual <= tol:
                estimate = _observed_ratio(residuals, floor)
                logger.info("fixed point after %d iterations, residual %.3e, ratio %.4f", n, residual, estimate)
                return FixedPointResult(
                    falpha=g,
                    iterations=n,
                    final_residual=residual,
                    contraction_estimate=estimate,
                    residuals=residuals,
                    snap_error=self.snap_error,
                    knots=list(self.partition.knots),
                )
        raise MaxIterExceeded(f"no convergence in {max_iter} iterations, last residual {residuals[-1]:.3e}")

    def derivative_recursion(
        self,
        falpha: GridFunction,
        r: int,
        tol: float = DEFAULT_TOL,
        max_iter: int = DEFAULT_MAX_ITER,
    ) -> GridFunction:
        """(f^alpha)^(r) from the differentiated self-referential equation."""
        return self.derivative_layers(falpha, r, tol, max_iter)[-1]

    def derivative_layers(
        self,
        falpha: GridFunction,
        r: int,
        tol: float = DEFAULT_TOL,
        max_iter: int = DEFAULT_MAX_ITER,
    ) -> List[GridFunction]:
        """[f^alpha, (f^alpha)', ..., (f^alpha)^(r)], solved order by order.

        Order j is again an RB-type equation in D = (f^alpha)^(j):
            D(x) = f^(j)(x) + a_i^-j [alpha_i(u) (D - b^(j))(u)
                                      + sum_{m<j} C(j,m) alpha_i^(j-m)(u) (f^alpha - b)^(m)(u)]
        with the lower orders already known.
        """
        spec = self.spec
        space = spec.space
        if r == 0:
            return [falpha]
        if r < 0:
            raise SpecInvalid(f"derivative order must be non-negative, got {r}")
        if space.kind != "ck":
            raise HypothesisViolated(f"the derivative recursion needs a Ck space, got {space.label}")
        if r > space.k:
            raise HypothesisViolated(f"order {r} exceeds the space order k = {space.k}")

        report = contraction_factor(spec)
        if report.hypothesis_satisfied is False:
            raise HypothesisViolated(
                f"||alpha_i||_C^{space.k} <= (a_i/2)^{space.k} fails: margins {report.hypothesis_margins}"
            )
        exact = self.seed.order >= space.k and self.base.order >= space.k
        tol_match = self.endpoint_tol if exact else max(self.endpoint_tol, FD_ENDPOINT_TOL)
        mismatch = derivative_endpoint_mismatch(self.seed, self.base, space.k)
        if mismatch > tol_match:
            raise HypothesisViolated(
                f"base and seed derivatives differ by {mismatch:.3g} at the endpoints (tolerance {tol_match:.3g})"
            )

        a_node = self.partition.ratios[self.index]
        layers = [falpha.without_derivatives()]
        for j in range(1, r + 1):
            coupling = self.alpha_u / a_node ** j
            if np.max(np.abs(coupling)) >= 1.0:
                raise HypothesisViolated(f"order-{j} recursion is not a sup-norm contraction")
            base_j = np.asarray(self.base.derivative(j).eval(self.u))
            forcing = self.seed.derivative(j).samples.copy()
            for m in range(j):
                diff_m = layers[m] - self.base.derivative(m).without_derivatives()
                alpha_m = spec.scaling.derivative_at(j - m, self.index, self.u)
                forcing += comb(j, m) * alpha_m * np.asarray(diff_m.eval(self.u)) / a_node ** j

            d = self.seed.derivative(j).without_derivatives()
            for n in range(1, max_iter + 1):
                values = forcing + coupling * (np.asarray(d.eval(self.u)) - base_j)
                residual = float(np.max(np.abs(values - d.samples)))
                d = d.with_samples(values)
                if residual <= tol * max(1.0, float(np.max(np.abs(values)))):
                    logger.debug("derivative order %d converged after %d iterations", j, n)
                    break
            else:
                raise MaxIterExceeded(f"derivative order {j} did not converge in {max_iter} iterations")
            layers.append(d)
        return layers


def _observed_ratio(residuals: List[float], floor: float) -> float:
    ratios = [
        residuals[n] / residuals[n - 1]
        for n in range(1, len(residuals))
        if residuals[n - 1] > floor
    ]
    return max(ratios) if ratios else 0.0


def apply_rb(spec: IfsSpec, g: GridFunction) -> GridFunction:
    """T g for the spec."""
    return RBOperator(spec).apply(g)


def fixed_point(
    spec: IfsSpec,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    initial: Optional[GridFunction] = None,
) -> FixedPointResult:
    """The alpha-fractal function of the spec."""
    return RBOperator(spec).fixed_point(tol, max_iter, initial)


def self_ref_residual(spec: IfsSpec, candidate: GridFunction) -> float:
    return RBOperator(spec).self_ref_residual(candidate)


def derivative_recursion(
    spec: IfsSpec,
    falpha: GridFunction,
    r: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> GridFunction:
    """(f^alpha)^(r) for a Ck(k) spec, r <= k."""
    return RBOperator(spec).derivative_recursion(falpha, r, tol, max_iter)


def derivative_stack(
    spec: IfsSpec,
    falpha: GridFunction,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> GridFunction:
    """f^alpha carrying its derivatives up to the space order."""
    k = spec.space.k if spec.space.kind == "ck" else 0
    if k == 0:
        return falpha
    layers = RBOperator(spec).derivative_layers(falpha, k, tol, max_iter)
    return falpha.with_derivatives([layer.samples for layer in layers[1:]])
