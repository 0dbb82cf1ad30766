"""
Shared fixtures: the reference problem on [0, 1] with knots 0, 1/2, 1,
seed x^2, base x and constant scaling 0.4, plus small fractal templates.
"""
import json

import numpy as np
import pytest

from fractal_operator.core.ifs import build_partition
from fractal_operator.extractors.expressions import expression_function
from fractal_operator.grid.grid_function import GridFunction
from fractal_operator.models.scaling import ScalingProfile
from fractal_operator.models.space import SpaceSpec
from fractal_operator.models.spec import BaseRule, IfsSpec
from fractal_operator.operators.base_operators import EndpointLine
from fractal_operator.operators.fractal_operator import FractalTemplate

TEST_LEVEL = 10


@pytest.fixture
def level():
    return TEST_LEVEL


@pytest.fixture
def half_partition():
    return build_partition([0.0, 0.5, 1.0])


@pytest.fixture
def reference_spec(half_partition):
    seed = GridFunction.from_callable(lambda x: x ** 2, (0.0, 1.0), TEST_LEVEL, [lambda x: 2 * x])
    base = GridFunction.from_callable(lambda x: x, (0.0, 1.0), TEST_LEVEL, [lambda x: np.ones_like(x)])
    return IfsSpec(
        partition=half_partition,
        scaling=ScalingProfile.constant([0.4, 0.4]),
        seed=seed,
        base=BaseRule.explicit(base),
    )


@pytest.fixture
def make_template(half_partition):
    """Factory for templates on the half partition with an endpoint-line base."""

    def factory(alpha=0.1, space=None, grid_level=TEST_LEVEL, **kwargs):
        return FractalTemplate(
            partition=half_partition,
            scaling=ScalingProfile.constant([alpha, alpha]),
            base_operator=EndpointLine(1.0),
            space=space or SpaceSpec.bounded(),
            grid_level=grid_level,
            **kwargs,
        )

    return factory


@pytest.fixture
def smooth_function():
    """x^2 + sin(pi x) with its first derivative."""
    return expression_function("x^2 + sin(pi*x)", (0.0, 1.0), TEST_LEVEL, 1)


@pytest.fixture
def write_problem(tmp_path):
    """Write a problem dict to a JSON file and return its path."""

    def writer(data, name="problem"):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return writer


@pytest.fixture
def reference_problem():
    return {
        "knots": [0, 0.5, 1],
        "alpha": {"kind": "const", "values": [0.4, 0.4]},
        "seed": {"kind": "expr", "expr": "x^2"},
        "base": {"kind": "explicit", "expr": "x"},
        "space": "bounded",
        "grid_level": 8,
    }


@pytest.fixture
def operator_problem():
    return {
        "knots": [0, 0.5, 1],
        "alpha": {"kind": "const", "values": [0.1, 0.1]},
        "seed": {"kind": "expr", "expr": "x^2 + sin(pi*x)"},
        "base": {"kind": "operator", "name": "endpoint_line"},
        "space": "bounded",
        "grid_level": 8,
    }
