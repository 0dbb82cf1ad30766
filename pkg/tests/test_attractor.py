import numpy as np
import pytest

from fractal_operator.engine.attractor import chaos_game
from fractal_operator.engine.rb_operator import fixed_point
from fractal_operator.exceptions import NotContractive
from fractal_operator.models.scaling import ScalingProfile


def test_points_lie_on_the_graph(reference_spec):
    falpha = fixed_point(reference_spec).falpha
    points = chaos_game(reference_spec, 2000, seed=7)
    assert points.shape == (2000, 2)
    assert np.all((points[:, 0] >= 0.0) & (points[:, 0] <= 1.0))
    assert np.max(np.abs(points[:, 1] - falpha(points[:, 0]))) < 2e-2


def test_points_cover_both_subintervals(reference_spec):
    x = chaos_game(reference_spec, 500, seed=1)[:, 0]
    assert np.any(x < 0.5) and np.any(x > 0.5)


def test_seeded_and_deterministic(reference_spec):
    a = chaos_game(reference_spec, 300, seed=11)
    b = chaos_game(reference_spec, 300, seed=11)
    c = chaos_game(reference_spec, 300, seed=12)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_empty_and_non_contractive(reference_spec):
    assert chaos_game(reference_spec, 0).shape == (0, 2)
    with pytest.raises(NotContractive):
        chaos_game(reference_spec.with_scaling(ScalingProfile.constant([1.2, 0.1])), 10)


def test_long_run_stays_near_the_grid_fixed_point(reference_spec):
    falpha = fixed_point(reference_spec).falpha
    points = chaos_game(reference_spec, 100_000, seed=5)
    distance = np.abs(points[:, 1] - falpha(points[:, 0]))
    assert np.mean(distance <= 5 * falpha.h) >= 0.99
