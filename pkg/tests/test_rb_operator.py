import numpy as np
import pytest

from fractal_operator.core.ifs import build_partition, validate_spec
from fractal_operator.engine.rb_operator import (
    RBOperator,
    apply_rb,
    derivative_recursion,
    derivative_stack,
    fixed_point,
    self_ref_residual,
)
from fractal_operator.exceptions import HypothesisViolated, MaxIterExceeded, NotContractive, SpecInvalid
from fractal_operator.extractors.expressions import expression_function
from fractal_operator.grid.grid_function import GridFunction, finite_difference
from fractal_operator.models.scaling import ScalingProfile
from fractal_operator.models.space import SpaceSpec
from fractal_operator.models.spec import BaseRule, IfsSpec
from fractal_operator.operators.sampling import random_test_function


def test_reference_values(reference_spec):
    falpha = fixed_point(reference_spec).falpha
    assert falpha(0.25) == pytest.approx(-0.0375, abs=1e-9)
    assert falpha(0.75) == pytest.approx(0.4625, abs=1e-9)
    assert falpha(0.125) == pytest.approx(-0.099375, abs=1e-9)


def test_interpolates_seed_at_knots(reference_spec):
    falpha = fixed_point(reference_spec).falpha
    for x in reference_spec.partition.knots:
        assert falpha(x) == pytest.approx(x ** 2, abs=1e-12)


def test_zero_scaling_returns_seed(reference_spec):
    spec = reference_spec.with_scaling(ScalingProfile.zeros(2))
    result = fixed_point(spec)
    np.testing.assert_allclose(result.falpha.samples, spec.seed.samples, atol=0.0)
    assert result.iterations == 1


def test_residual_ratio_and_self_reference(reference_spec):
    result = fixed_point(reference_spec)
    assert 0.0 < result.contraction_estimate <= 0.4 + 1e-4
    assert all(b <= a * (0.4 + 1e-4) for a, b in zip(result.residuals, result.residuals[1:]) if a > 1e-10)
    assert self_ref_residual(reference_spec, result.falpha) < 1e-12


def test_unique_fixed_point(reference_spec, level):
    start = GridFunction.from_callable(lambda x: np.cos(7 * x), (0.0, 1.0), level)
    a = fixed_point(reference_spec).falpha
    b = fixed_point(reference_spec, initial=start).falpha
    assert (a - b).sup_norm() < 1e-10


def test_apply_is_affine_in_g(reference_spec, level):
    g = GridFunction.from_callable(np.sin, (0.0, 1.0), level)
    h = GridFunction.from_callable(np.exp, (0.0, 1.0), level)
    lhs = apply_rb(reference_spec, 0.5 * g + 0.5 * h)
    rhs = 0.5 * apply_rb(reference_spec, g) + 0.5 * apply_rb(reference_spec, h)
    np.testing.assert_allclose(lhs.samples, rhs.samples, atol=1e-14)


def test_non_dyadic_knots_snap_to_nodes(level):
    partition = build_partition([0.0, 1.0 / 3.0, 1.0])
    seed = GridFunction.from_callable(lambda x: x ** 2, (0.0, 1.0), level)
    base = GridFunction.from_callable(lambda x: x, (0.0, 1.0), level)
    spec = IfsSpec(partition=partition, scaling=ScalingProfile.constant([0.3, 0.3]), seed=seed, base=BaseRule.explicit(base))
    result = fixed_point(spec)
    assert 0.0 < result.snap_error <= seed.h / 2.0
    assert result.knots[1] in seed.nodes
    for x in result.knots:
        assert abs(result.falpha(x) - seed(x)) <= 1e-10


def _random_non_dyadic_spec(rng, level):
    h = 2.0 ** -level
    while True:
        interior = np.sort(rng.uniform(0.1, 0.9, size=rng.integers(1, 4)))
        if np.all(np.diff(np.concatenate(([0.0], interior, [1.0]))) > 4 * h):
            break
    partition = build_partition([0.0, *interior, 1.0])
    c1, c2 = rng.uniform(-2.0, 2.0), rng.uniform(1.0, 6.0)
    seed = GridFunction.from_callable(lambda x: c1 * np.sin(c2 * x) + x ** 2, (0.0, 1.0), level)
    f0, f1 = seed.samples[0], seed.samples[-1]
    base = GridFunction.from_callable(lambda x: f0 + (f1 - f0) * x, (0.0, 1.0), level)
    alpha = rng.uniform(-0.6, 0.6, size=partition.n_intervals)
    return IfsSpec(partition=partition, scaling=ScalingProfile.constant(alpha), seed=seed, base=BaseRule.explicit(base))


def test_random_non_dyadic_specs_interpolate_at_snapped_knots(level):
    rng = np.random.default_rng(31)
    for _ in range(20):
        spec = _random_non_dyadic_spec(rng, level)
        result = fixed_point(spec)
        knot_values = np.asarray(result.falpha(np.asarray(result.knots)))
        assert np.max(np.abs(knot_values - np.asarray(spec.seed(np.asarray(result.knots))))) <= 1e-10


def _random_dyadic_spec(rng, level):
    """Knots on multiples of 1/8, random seed, base equal to the seed at both ends."""
    interior = np.sort(rng.choice(np.arange(1, 8), size=rng.integers(1, 4), replace=False)) / 8.0
    partition = build_partition([0.0, *interior, 1.0])
    seed = random_test_function(rng, (0.0, 1.0), level)
    f0, f1 = seed.samples[0], seed.samples[-1]
    line = GridFunction.from_callable(lambda x: f0 + (f1 - f0) * x, (0.0, 1.0), level)
    base = line + random_test_function(rng, (0.0, 1.0), level, vanish_order=1)
    alpha = rng.uniform(-0.8, 0.8, size=partition.n_intervals)
    return IfsSpec(partition=partition, scaling=ScalingProfile.constant(alpha), seed=seed, base=BaseRule.explicit(base))


def test_random_contractive_specs_interpolate_at_knots(level):
    rng = np.random.default_rng(23)
    for _ in range(20):
        spec = _random_dyadic_spec(rng, level)
        result = fixed_point(spec)
        assert result.snap_error == 0.0
        knots = np.asarray(spec.partition.knots)
        assert np.max(np.abs(np.asarray(result.falpha(knots)) - np.asarray(spec.seed(knots)))) <= 1e-10
        assert self_ref_residual(spec, result.falpha) <= 1e-10


def test_knots_closer_than_the_grid_step():
    partition = build_partition([0.0, 0.3, 0.3001, 1.0])
    seed = GridFunction.from_callable(lambda x: x ** 2, (0.0, 1.0), 4)
    base = GridFunction.from_callable(lambda x: x, (0.0, 1.0), 4)
    spec = IfsSpec(partition=partition, scaling=ScalingProfile.constant([0.1, 0.1, 0.1]), seed=seed, base=BaseRule.explicit(base))
    assert [c.name for c in validate_spec(spec).blocking_failures] == ["knot_resolution"]
    with pytest.raises(SpecInvalid):
        RBOperator(spec)


def test_scaling_bound_is_reported(reference_spec):
    check = validate_spec(reference_spec.with_scaling(ScalingProfile.constant([1.2, 0.1]))).check("scaling_bound")
    assert check.value == pytest.approx(1.2)
    assert not check.passed and not check.blocking
    assert validate_spec(reference_spec).check("scaling_bound").passed


def test_rejects_non_contractive(reference_spec):
    with pytest.raises(NotContractive) as info:
        fixed_point(reference_spec.with_scaling(ScalingProfile.constant([1.0, 0.5])))
    assert info.value.report.factor == pytest.approx(1.0)


def test_rejects_endpoint_mismatch(reference_spec, level):
    shifted = GridFunction.from_callable(lambda x: x + 0.1, (0.0, 1.0), level)
    spec = reference_spec.with_base(BaseRule.explicit(shifted))
    report = validate_spec(spec)
    assert [c.name for c in report.blocking_failures] == ["endpoint_match"]
    with pytest.raises(SpecInvalid) as info:
        RBOperator(spec)
    assert info.value.report is not None


def test_rejects_grid_and_count_mismatch(reference_spec, level):
    coarse = GridFunction.from_callable(lambda x: x, (0.0, 1.0), level - 1)
    with pytest.raises(SpecInvalid):
        RBOperator(reference_spec.with_base(BaseRule.explicit(coarse)))
    with pytest.raises(SpecInvalid):
        RBOperator(reference_spec.with_scaling(ScalingProfile.constant([0.1, 0.1, 0.1])))


def test_max_iter(reference_spec):
    with pytest.raises(MaxIterExceeded):
        fixed_point(reference_spec, tol=1e-14, max_iter=3)


def test_base_equal_to_seed_is_reported(reference_spec):
    spec = reference_spec.with_base(BaseRule.explicit(reference_spec.seed))
    check = validate_spec(spec).check("base_differs")
    assert check is not None and not check.passed and not check.blocking
    np.testing.assert_allclose(fixed_point(spec).falpha.samples, spec.seed.samples)


@pytest.fixture
def smooth_spec(half_partition, level):
    """f = x^2 and b = x^2 + x^2 (1-x)^2 agree to first order at both ends."""
    seed = expression_function("x^2", (0.0, 1.0), level, 1)
    base = expression_function("x^2 + x^2*(1 - x)^2", (0.0, 1.0), level, 1)
    return IfsSpec(
        partition=half_partition,
        scaling=ScalingProfile.constant([0.2, 0.2]),
        seed=seed,
        base=BaseRule.explicit(base),
        space=SpaceSpec.ck(1),
    )


def test_derivative_recursion(smooth_spec):
    falpha = fixed_point(smooth_spec).falpha
    slope = derivative_recursion(smooth_spec, falpha, 1)
    np.testing.assert_allclose(slope(np.array([0.0, 0.5, 1.0])), [0.0, 1.0, 2.0], atol=1e-9)
    rebuilt = slope.running_integral("trapezoid") + falpha.samples[0]
    assert (rebuilt - falpha).sup_norm() < 2e-3


def test_derivative_recursion_matches_finite_differences(half_partition):
    seed = expression_function("x^2", (0.0, 1.0), 12, 1)
    base = expression_function("x^2 + x^2*(1 - x)^2", (0.0, 1.0), 12, 1)
    spec = IfsSpec(
        partition=half_partition,
        scaling=ScalingProfile.constant([0.2, 0.2]),
        seed=seed,
        base=BaseRule.explicit(base),
        space=SpaceSpec.ck(1),
    )
    falpha = fixed_point(spec).falpha
    slope = derivative_recursion(spec, falpha, 1)
    assert (slope - finite_difference(falpha, 1)).sup_norm() <= 1e-3
    np.testing.assert_allclose(slope(np.array([0.0, 0.5, 1.0])), [0.0, 1.0, 2.0], atol=1e-9)


def test_derivative_stack(smooth_spec):
    falpha = fixed_point(smooth_spec).falpha
    stacked = derivative_stack(smooth_spec, falpha)
    assert stacked.order == 1
    np.testing.assert_allclose(stacked.samples, falpha.samples)


def test_derivative_recursion_hypotheses(smooth_spec, level):
    falpha = fixed_point(smooth_spec).falpha
    with pytest.raises(HypothesisViolated):
        derivative_recursion(smooth_spec, falpha, 2)
    with pytest.raises(HypothesisViolated):
        derivative_recursion(smooth_spec.with_space(SpaceSpec.sobolev(1, 2)), falpha, 1)
    line = expression_function("x", (0.0, 1.0), level, 1)
    with pytest.raises(HypothesisViolated):
        derivative_recursion(smooth_spec.with_base(BaseRule.explicit(line)), falpha, 1)
    with pytest.raises(HypothesisViolated):
        derivative_recursion(smooth_spec.with_scaling(ScalingProfile.constant([0.3, 0.2])), falpha, 1)
