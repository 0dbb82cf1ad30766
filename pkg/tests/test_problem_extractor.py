import math

import numpy as np
import pytest

from fractal_operator.exceptions import ExpressionError, NonMonotoneKnots, ProblemFileError, SpecInvalid
from fractal_operator.extractors.expressions import expression_function, parse_expression
from fractal_operator.extractors.problem_extractor import ProblemExtractor, space_from_json
from fractal_operator.models.settings import SolverSettings
from fractal_operator.models.space import SpaceSpec


@pytest.mark.parametrize("text", ["x^2 + sin(pi*x)", "2.5e-1*x**3", "abs(x - 0.5)", "exp(-x)*cos(2*pi*x)"])
def test_parse_accepts_grammar(text):
    expr = parse_expression(text)
    assert expr.free_symbols <= {parse_expression("x")}


@pytest.mark.parametrize("text", ["", "y + 1", "__import__('os')", "x.__class__", "log(x)", "x; 1", "x[0]"])
def test_parse_rejects(text):
    with pytest.raises(ExpressionError):
        parse_expression(text)


def test_expression_function_carries_exact_derivatives():
    g = expression_function("sin(pi*x)", (0.0, 1.0), 8, 2)
    assert g.order == 2
    np.testing.assert_allclose(g.derivative(1).samples, np.pi * np.cos(np.pi * g.nodes), atol=1e-12)
    np.testing.assert_allclose(g.derivative(2).samples, -np.pi ** 2 * np.sin(np.pi * g.nodes), atol=1e-11)


def test_expression_must_be_finite():
    with pytest.raises(ExpressionError):
        expression_function("1/x", (0.0, 1.0), 4)


def test_space_from_json():
    assert space_from_json("lp:2") == SpaceSpec.lp(2)
    assert space_from_json({"kind": "lp", "p": "inf"}).label == "Lp(inf)"
    assert space_from_json({"kind": "sobolev", "k": 1, "p": 2}) == SpaceSpec.sobolev(1, 2)
    with pytest.raises(SpecInvalid):
        space_from_json({"kind": "hoelder", "k": 1, "sigma": 3})


def test_build_spec(reference_problem):
    extractor = ProblemExtractor(SolverSettings())
    spec = extractor.build_spec(extractor.parse(reference_problem))
    assert spec.seed.size == 2 ** 8 + 1
    assert spec.partition.knots == [0.0, 0.5, 1.0]
    assert spec.base.kind == "explicit"
    assert spec.space == SpaceSpec.bounded()


def test_overrides_take_precedence(reference_problem):
    extractor = ProblemExtractor(SolverSettings(grid_level=6, tol=1e-9))
    problem = extractor.parse({**reference_problem, "space": {"kind": "ck", "k": 1}})
    spec = extractor.build_spec(problem, SpaceSpec.lp(2), 5)
    assert spec.seed.size == 2 ** 5 + 1
    assert spec.space == SpaceSpec.lp(2)
    assert extractor.resolve_tol(problem) == 1e-9
    assert extractor.resolve_tol(problem, 1e-6) == 1e-6
    assert extractor.resolve_level(extractor.parse({k: v for k, v in reference_problem.items() if k != "grid_level"})) == 6


def test_derivative_stack_follows_space(reference_problem):
    extractor = ProblemExtractor()
    spec = extractor.build_spec(extractor.parse({**reference_problem, "space": "sobolev:1,2"}))
    assert spec.seed.order == 1
    assert spec.base.function.order == 1


def test_sampled_sections(reference_problem):
    problem = {
        **reference_problem,
        "alpha": {"kind": "sampled", "samples": [[0.1, 0.2, 0.1], [0.0, 0.1]]},
        "seed": {"kind": "samples", "values": [0.0, 0.25, 1.0]},
        "base": {"kind": "explicit", "values": [0.0, 1.0]},
    }
    extractor = ProblemExtractor()
    spec = extractor.build_spec(extractor.parse(problem))
    assert not spec.scaling.is_constant
    assert spec.seed(0.5) == pytest.approx(0.25)
    assert spec.base.function(0.5) == pytest.approx(0.5)


def test_operator_template(operator_problem):
    extractor = ProblemExtractor()
    problem = extractor.parse({**operator_problem, "base": {"kind": "operator", "name": "blend", "lambda": 0.5}})
    template = extractor.build_template(problem)
    assert template.base_operator.label == "blend(0.5)"
    assert template.grid_level == 8
    assert template.K == pytest.approx(0.1)


def test_table_operator(operator_problem):
    base = {
        "kind": "operator",
        "name": "table",
        "rows": [{"point": 0, "profile": "1 - x"}, {"point": 1, "profile": "x"}],
        "norm_bound": 1.0,
    }
    extractor = ProblemExtractor()
    template = extractor.build_template(extractor.parse({**operator_problem, "base": base}))
    assert template.norm_L == 1.0
    assert template.deviation_L == 2.0


def test_schema_errors(reference_problem, operator_problem, tmp_path):
    extractor = ProblemExtractor()
    with pytest.raises(ProblemFileError):
        extractor.parse([1, 2])
    with pytest.raises(ProblemFileError):
        extractor.parse({k: v for k, v in reference_problem.items() if k != "seed"})
    with pytest.raises(ProblemFileError):
        extractor.parse({**reference_problem, "alpha": {"kind": "sampled"}})
    with pytest.raises(ProblemFileError):
        extractor.parse({**operator_problem, "base": {"kind": "operator", "name": "blend"}})
    with pytest.raises(ProblemFileError):
        extractor.build_template(extractor.parse(reference_problem))
    with pytest.raises(ProblemFileError):
        extractor.load(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ProblemFileError):
        extractor.load(broken)


def test_invalid_content(reference_problem):
    extractor = ProblemExtractor()
    with pytest.raises(NonMonotoneKnots):
        extractor.build_spec(extractor.parse({**reference_problem, "knots": [0, 0.6, 0.4, 1]}))
    with pytest.raises(ExpressionError):
        extractor.build_spec(extractor.parse({**reference_problem, "seed": {"kind": "expr", "expr": "import os"}}))
    with pytest.raises(SpecInvalid):
        extractor.build_spec(extractor.parse({**reference_problem, "space": "lp:-1"}))


def test_infinite_exponent_text():
    assert math.isinf(space_from_json({"kind": "sobolev", "k": 2, "p": "infinity"}).p)
