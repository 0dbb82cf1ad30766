import csv
import json

import pytest

from fractal_operator.cli.commands import EXIT_ERROR, EXIT_INVALID, EXIT_OK, SCHEMA_VERSION, run


def _report(out: str) -> dict:
    """JSON report printed after any text lines."""
    return json.loads(out[out.index("{"):])


def _rows(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


@pytest.fixture
def output(tmp_path):
    return tmp_path / "out"


@pytest.fixture
def smooth_problem(reference_problem):
    return {
        **reference_problem,
        "alpha": {"kind": "const", "values": [0.2, 0.2]},
        "base": {"kind": "explicit", "expr": "x^2 + x^2*(1 - x)^2"},
        "space": "ck:1",
    }


def test_eval_writes_curve_and_report(write_problem, reference_problem, output, capsys):
    path = write_problem(reference_problem)
    code = run(["eval", "--input", str(path), "--output", str(output)])
    assert code == EXIT_OK
    rows = _rows(output / "problem.eval.csv")
    assert rows[0] == ["x", "value"]
    assert len(rows) == 2 ** 8 + 2
    report = json.loads((output / "problem.eval.report.json").read_text(encoding="utf-8"))
    assert report["schema"] == SCHEMA_VERSION
    assert report["status"] == "ok"
    assert report["knot_error"] < 1e-12
    assert report["contraction"]["factor"] == pytest.approx(0.4)
    assert _report(capsys.readouterr().out) == report


def test_eval_refuses_non_contractive(write_problem, reference_problem, output, capsys):
    path = write_problem({**reference_problem, "alpha": {"kind": "const", "values": [1.0, 0.2]}})
    assert run(["eval", "--input", str(path), "--output", str(output)]) == EXIT_INVALID
    captured = capsys.readouterr()
    payload = _report(captured.out)
    assert payload["status"] == "error"
    assert payload["error"]["type"] == "NotContractive"
    assert payload["report"]["satisfied"] is False
    assert "error:" in captured.err
    assert (output / "problem.eval.report.json").exists()


def test_verify_reports_failed_hoelder_condition(write_problem, reference_problem, output, capsys):
    path = write_problem(reference_problem)
    code = run(["verify", "--input", str(path), "--output", str(output), "--space", "hoelder:1,0.5"])
    assert code == EXIT_INVALID
    captured = capsys.readouterr()
    report = _report(captured.out)
    assert report["factor"] == pytest.approx(0.4 / 0.5 ** 1.5, rel=1e-9)
    assert report["satisfied"] is False
    assert report["status"] == "failed"
    assert captured.out.splitlines()[0].split() == ["space", "Hoelder(1,0.5)"]
    assert "validation failed" in captured.err


def test_verify_passes_in_lp(write_problem, reference_problem, output, capsys):
    path = write_problem(reference_problem)
    assert run(["verify", "--input", str(path), "--output", str(output), "--space", "lp:2"]) == EXIT_OK
    report = _report(capsys.readouterr().out)
    assert report["space"] == "Lp(2)"
    assert report["validation"]["passed"]


@pytest.mark.parametrize(
    "argv",
    [[], ["eval"], ["bogus", "--input", "x.json"], ["eval", "--input", "x.json", "--grid-level", "many"]],
)
def test_usage_errors(argv, capsys):
    assert run(argv) == EXIT_ERROR
    assert _report(capsys.readouterr().out)["error"]["type"] == "UsageError"


def test_missing_problem_file(tmp_path, output, capsys):
    code = run(["eval", "--input", str(tmp_path / "absent.json"), "--output", str(output)])
    assert code == EXIT_ERROR
    payload = _report(capsys.readouterr().out)
    assert payload["command"] == "eval"
    assert payload["error"]["type"] == "ProblemFileError"


def test_invalid_space_flag(write_problem, reference_problem, output, capsys):
    path = write_problem(reference_problem)
    assert run(["verify", "--input", str(path), "--output", str(output), "--space", "lp:0"]) == EXIT_INVALID
    assert _report(capsys.readouterr().out)["error"]["type"] == "SpecInvalid"


def test_perturb_bound(write_problem, operator_problem, output, capsys):
    path = write_problem(operator_problem)
    assert run(["perturb-bound", "--input", str(path), "--output", str(output)]) == EXIT_OK
    report = _report(capsys.readouterr().out)
    assert report["perturbation"]["satisfied"]
    assert report["bounded_below"]["applicable"]
    assert report["automorphism"]["satisfied"]
    assert report["template"]["operator"] == "endpoint_line"


def test_operator_commands_need_operator_base(write_problem, reference_problem, output, capsys):
    path = write_problem(reference_problem)
    assert run(["perturb-bound", "--input", str(path), "--output", str(output)]) == EXIT_ERROR
    assert _report(capsys.readouterr().out)["error"]["type"] == "ProblemFileError"
    assert json.loads((output / "problem.perturb-bound.report.json").read_text())["status"] == "error"


def test_opnorm(write_problem, operator_problem, output, capsys):
    path = write_problem(operator_problem)
    assert run(["opnorm", "--input", str(path), "--output", str(output), "--terms", "3", "--seed", "2"]) == EXIT_OK
    report = _report(capsys.readouterr().out)
    assert report["trials"] == 3
    assert report["consistent"]
    assert report["operator_norm_lower"] <= report["operator_norm_upper"]


def test_invert(write_problem, operator_problem, output, capsys):
    path = write_problem(operator_problem)
    assert run(["invert", "--input", str(path), "--output", str(output)]) == EXIT_OK
    report = _report(capsys.readouterr().out)
    assert report["terms"] > 0
    assert report["residual_sup"] < 1e-8
    assert _rows(output / "problem.invert.csv")[0] == ["x", "value"]


def test_basis(write_problem, operator_problem, output, capsys):
    path = write_problem(operator_problem)
    assert run(["basis", "--input", str(path), "--output", str(output), "--space", "bounded", "--terms", "8"]) == EXIT_OK
    report = _report(capsys.readouterr().out)
    assert report["level"] == 0
    assert report["count"] == 8
    assert len(report["coefficients"]) == 8
    assert sorted(report["errors_by_n"], key=int) == [str(n) for n in range(1, 9)]
    for n in range(1, 9):
        assert (output / f"problem.basis.{n}.csv").exists()


def test_basis_in_lp_needs_bounded_base(write_problem, operator_problem, output, capsys):
    path = write_problem(operator_problem)
    assert run(["basis", "--input", str(path), "--output", str(output), "--space", "lp:2"]) == EXIT_INVALID
    assert _report(capsys.readouterr().out)["error"]["type"] == "HypothesisViolated"


def test_attractor(write_problem, reference_problem, output, capsys):
    path = write_problem(reference_problem)
    code = run(["attractor", "--input", str(path), "--output", str(output), "--terms", "100", "--seed", "3"])
    assert code == EXIT_OK
    rows = _rows(output / "problem.attractor.csv")
    assert rows[0] == ["x", "y"]
    assert len(rows) == 101
    assert _report(capsys.readouterr().out)["seed"] == 3


def test_export_with_recursive_derivatives(write_problem, smooth_problem, output, capsys):
    path = write_problem(smooth_problem, name="smooth")
    assert run(["export", "--input", str(path), "--output", str(output)]) == EXIT_OK
    report = _report(capsys.readouterr().out)
    assert report["derivatives"] == "recursion"
    header = _rows(output / "smooth.export.csv")[0]
    assert header == ["x", "seed", "seed_d1", "base", "base_d1", "falpha", "falpha_d1"]


def test_env_file_sets_grid_level(write_problem, reference_problem, tmp_path, output, monkeypatch):
    monkeypatch.setenv("FRACTAL_GRID_LEVEL", "")
    monkeypatch.delenv("FRACTAL_GRID_LEVEL")
    env_file = tmp_path / "cli.env"
    env_file.write_text("FRACTAL_GRID_LEVEL=5\n", encoding="utf-8")
    problem = {k: v for k, v in reference_problem.items() if k != "grid_level"}
    path = write_problem(problem)
    assert run(["eval", "--input", str(path), "--output", str(output), "--env-file", str(env_file)]) == EXIT_OK
    assert len(_rows(output / "problem.eval.csv")) == 2 ** 5 + 2
