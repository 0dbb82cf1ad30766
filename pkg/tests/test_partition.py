import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractal_operator.core.ifs import affine_inverse, build_partition
from fractal_operator.exceptions import NonMonotoneKnots, OutOfRange, TooFewKnots


def test_ratios_and_intercepts():
    partition = build_partition([0.0, 0.25, 1.0, 2.0])
    np.testing.assert_allclose(partition.ratios, [0.125, 0.375, 0.5])
    np.testing.assert_allclose(partition.intercepts, [0.0, 0.25, 1.0])
    assert partition.domain == (0.0, 2.0)
    assert partition.n_intervals == 3
    assert not partition.is_uniform


def test_rejects_bad_knots():
    with pytest.raises(TooFewKnots):
        build_partition([0.0, 1.0])
    with pytest.raises(NonMonotoneKnots):
        build_partition([0.0, 0.5, 0.5, 1.0])
    with pytest.raises(NonMonotoneKnots):
        build_partition([0.0, 0.7, 0.3, 1.0])


def test_interior_knot_belongs_to_right_subinterval():
    partition = build_partition([0.0, 0.5, 1.0])
    idx = partition.subinterval_index(np.array([0.0, 0.25, 0.5, 0.75, 1.0]))
    np.testing.assert_array_equal(idx, [0, 0, 1, 1, 1])


def test_affine_inverse_range_and_scalar():
    amap = build_partition([0.0, 0.5, 1.0]).maps[1]
    assert affine_inverse(amap, 0.75) == pytest.approx(0.5)
    assert isinstance(affine_inverse(amap, 0.5), float)
    np.testing.assert_allclose(affine_inverse(amap, np.array([0.5, 1.0])), [0.0, 1.0])
    with pytest.raises(OutOfRange):
        affine_inverse(amap, 0.25)


@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8))
@settings(max_examples=50, deadline=None)
def test_maps_send_endpoints_to_knots(steps):
    knots = np.concatenate(([-1.0], -1.0 + np.cumsum(steps)))
    partition = build_partition(knots)
    lo, hi = partition.domain
    for i, amap in enumerate(partition.maps):
        assert amap(lo) == pytest.approx(knots[i], abs=1e-12)
        assert amap(hi) == pytest.approx(knots[i + 1], abs=1e-12)
        assert 0.0 < amap.a < 1.0
    assert np.sum(partition.ratios) == pytest.approx(1.0)
