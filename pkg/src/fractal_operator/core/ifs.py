"""
Partition construction, inverse affine maps and spec validation.
"""
import logging
from typing import List, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from ..exceptions import FractalError, NonMonotoneKnots, OutOfRange, SpecInvalid, TooFewKnots
from ..grid.grid_function import MAX_FD_ORDER, GridFunction, snap_knots
from ..models.partition import AFFINE_TOL, AffineMap, Partition
from ..models.reports import CheckResult, ValidationReport
from ..models.settings import DEFAULT_ENDPOINT_TOL
from ..models.spec import IfsSpec
from ..norms.contraction import contraction_factor

logger = logging.getLogger(__name__)

# Derivative endpoint checks fall back to this when either side is finite-differenced.
FD_ENDPOINT_TOL = 1e-6


def build_partition(knots: Sequence[float]) -> Partition:
    """Partition of [x_1, x_N] with its affine maps."""
    values = [float(x) for x in knots]
    if len(values) < 3:
        raise TooFewKnots(f"a partition needs at least 3 knots, got {len(values)}")
    if not np.all(np.isfinite(values)):
        raise NonMonotoneKnots("knots must be finite")
    steps = np.diff(values)
    if np.any(steps <= 0):
        bad = int(np.argmax(steps <= 0))
        raise NonMonotoneKnots(f"knots must be strictly increasing: x[{bad}]={values[bad]} >= x[{bad + 1}]={values[bad + 1]}")
    try:
        return Partition(knots=values)
    except ValidationError as e:
        raise NonMonotoneKnots(str(e)) from e


def snap_partition(partition: Partition, gf: GridFunction) -> Tuple[Partition, float]:
    """Partition whose knots are the grid nodes nearest to the original knots, and the largest move."""
    idx, error = snap_knots(partition, gf)
    if np.any(np.diff(idx) <= 0):
        raise SpecInvalid(f"knots {partition.knots} are closer than the grid step {gf.h:.3g}")
    if error == 0.0:
        return partition, 0.0
    return build_partition(gf.nodes[idx]), error


def affine_inverse(amap: AffineMap, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """L^{-1}(x) = (x - d)/a for x in the image interval of the map."""
    lo, hi = amap.image
    slack = AFFINE_TOL * (amap.source[1] - amap.source[0])
    arr = np.asarray(x, dtype=float)
    if np.any(arr < lo - slack) or np.any(arr > hi + slack):
        raise OutOfRange(f"{x} lies outside the image interval [{lo}, {hi}]")
    u = np.clip(amap.inverse(arr), amap.source[0], amap.source[1])
    return float(u) if u.ndim == 0 else u


def validate_spec(spec: IfsSpec, endpoint_tol: float = DEFAULT_ENDPOINT_TOL) -> ValidationReport:
    """Check every hypothesis the spec's space needs; never raises."""
    checks: List[CheckResult] = []
    partition, seed = spec.partition, spec.seed
    k = spec.requires_derivatives

    domain_ok = np.allclose(seed.domain, partition.domain, rtol=0.0, atol=AFFINE_TOL * partition.length)
    checks.append(CheckResult(
        name="domain_match",
        value=float(max(abs(seed.lo - partition.domain[0]), abs(seed.hi - partition.domain[1]))),
        threshold=AFFINE_TOL * partition.length,
        passed=bool(domain_ok),
        blocking=True,
        detail="seed grid spans [x_1, x_N]",
    ))
    checks.append(CheckResult(
        name="scaling_count",
        value=float(len(spec.scaling)),
        threshold=float(partition.n_intervals),
        passed=len(spec.scaling) == partition.n_intervals,
        blocking=True,
        detail="one scaling per subinterval",
    ))

    try:
        b = spec.base.resolve(seed)
    except FractalError as e:
        checks.append(CheckResult(name="base", passed=False, blocking=True, detail=str(e)))
        return ValidationReport(space=spec.space.label, checks=checks)

    grid_ok = b.same_grid(seed)
    checks.append(CheckResult(
        name="grid_match", passed=grid_ok, blocking=True, detail="base and seed share the grid",
    ))
    if not (domain_ok and grid_ok):
        return ValidationReport(space=spec.space.label, checks=checks)

    idx, snap_error = snap_knots(partition, seed)
    checks.append(CheckResult(
        name="knot_resolution",
        value=snap_error,
        threshold=seed.h / 2.0,
        passed=bool(np.all(np.diff(idx) > 0)),
        blocking=True,
        detail="knots snap to distinct grid nodes",
    ))

    mismatch = max(abs(b.samples[0] - seed.samples[0]), abs(b.samples[-1] - seed.samples[-1]))
    checks.append(CheckResult(
        name="endpoint_match",
        value=float(mismatch),
        threshold=endpoint_tol,
        passed=bool(mismatch <= endpoint_tol),
        blocking=True,
        detail="b(x_1) = f(x_1) and b(x_N) = f(x_N)",
    ))

    distance = (b - seed).sup_norm()
    checks.append(CheckResult(
        name="base_differs",
        value=distance,
        threshold=endpoint_tol,
        passed=distance > endpoint_tol,
        detail="||b - f||_inf > tol",
    ))

    if k >= 1:
        exact = seed.order >= k and b.order >= k
        fd_possible = seed.size >= 2 * min(k, MAX_FD_ORDER) + 1 and k <= MAX_FD_ORDER
        checks.append(CheckResult(
            name="derivative_data",
            value=float(min(seed.order, b.order)),
            threshold=float(k),
            passed=bool(exact or fd_possible),
            detail=f"seed and base carry {k} derivatives or can be finite-differenced",
        ))
        if exact or fd_possible:
            tol = endpoint_tol if exact else max(endpoint_tol, FD_ENDPOINT_TOL)
            worst = derivative_endpoint_mismatch(seed, b, k)
            checks.append(CheckResult(
                name="derivative_endpoint_match",
                value=worst,
                threshold=tol,
                passed=worst <= tol,
                detail=f"b^(r) = f^(r) at x_1 and x_N for r = 1..{k}",
            ))

    if len(spec.scaling) == partition.n_intervals:
        worst_alpha = float(np.max(spec.scaling.sup_magnitudes))
        checks.append(CheckResult(
            name="scaling_bound",
            value=worst_alpha,
            threshold=1.0,
            passed=worst_alpha < 1.0,
            detail="||alpha_i||_inf < 1",
        ))
        try:
            report = contraction_factor(spec)
            checks.append(CheckResult(
                name="contraction",
                value=report.factor,
                threshold=1.0,
                passed=report.factor < 1.0,
                detail=report.condition_text,
            ))
            if report.hypothesis_satisfied is not None:
                checks.append(CheckResult(
                    name="ck_hypothesis",
                    value=float(min(report.hypothesis_margins)),
                    threshold=0.0,
                    passed=report.hypothesis_satisfied,
                    detail=f"||alpha_i||_C^{spec.space.k} <= (a_i/2)^{spec.space.k}",
                ))
        except FractalError as e:
            checks.append(CheckResult(name="contraction", passed=False, detail=str(e)))

    report = ValidationReport(space=spec.space.label, checks=checks)
    if report.failed:
        logger.info("validation in %s failed: %s", spec.space.label, ", ".join(report.failed))
    return report


def derivative_endpoint_mismatch(f, b, k: int) -> float:
    """max over r = 1..k of |b^(r) - f^(r)| at both endpoints."""
    worst = 0.0
    for r in range(1, k + 1):
        df, db = f.derivative(r).samples, b.derivative(r).samples
        worst = max(worst, abs(df[0] - db[0]), abs(df[-1] - db[-1]))
    return float(worst)
