"""
Batch command line: problem file in, CSV curves and JSON reports out.

Exit codes: 0 success, 2 validation failure (report still written),
1 usage, I/O, parse or convergence errors.
"""
import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from ..basis.schauder import build_ladder, fractalize_basis, ladder_level_for, reconstruct
from ..core.ifs import validate_spec
from ..engine.attractor import chaos_game
from ..engine.rb_operator import RBOperator, derivative_stack
from ..exceptions import (
    ExpressionError,
    FractalError,
    HypothesisViolated,
    MaxIterExceeded,
    MaxTermsExceeded,
    NotContractive,
    ProblemFileError,
)
from ..extractors.problem_extractor import ProblemExtractor, ProblemFile
from ..grid.grid_function import GridFunction, columns_to_csv
from ..models.reports import json_number
from ..models.settings import SolverSettings
from ..models.space import SpaceSpec
from ..models.spec import IfsSpec
from ..norms.contraction import contraction_factor
from ..operators.fractal_operator import (
    FractalTemplate,
    automorphism_bounds,
    base_operator_norm_lower_bound,
    bounded_below_check,
    deviation_norm_lower_bound,
    deviation_norm_upper_bound,
    neumann_expansion,
    falpha_operator,
    operator_norm_lower_bound,
    operator_norm_upper_bound,
    perturbation_bounds,
)
from ..utils.config import Config
from ..utils.logging import configure_logging

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2

DEFAULT_TRIALS = 20
DEFAULT_BASIS_TERMS = 16
DEFAULT_ATTRACTOR_POINTS = 10_000
BOUND_TOL = 1e-6

COMMANDS = {
    "eval": "iterate the RB operator to f^alpha and write its samples",
    "verify": "report the contraction factor and hypothesis checks",
    "perturb-bound": "check the perturbation bounds of f^alpha - f",
    "opnorm": "estimate lower bounds of ||F^alpha|| and ||I_d - F^alpha||",
    "invert": "invert F^alpha on the seed by the Neumann series",
    "basis": "write the fractal Schauder basis and the seed's expansion errors",
    "attractor": "sample the graph attractor by the chaos game",
    "export": "write seed, base and f^alpha with derivative columns",
}


class UsageError(Exception):
    """Rejected command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fractal-operator", description="Alpha-fractal functions and fractal operators", allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text, allow_abbrev=False)
        p.add_argument("--input", required=True, help="JSON problem file")
        p.add_argument("--output", default=".", help="output directory")
        p.add_argument("--grid-level", type=int, help="grid level m (2^m + 1 nodes)")
        p.add_argument("--tol", type=float, help="fixed-point tolerance")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--space", help="space, e.g. bounded, lp:2, ck:1, sobolev:1,2, hoelder:1,0.5")
        p.add_argument("--terms", type=int, help="trials, basis size or point count, depending on the command")
        p.add_argument("--log-level", help="package log level")
        p.add_argument("--env-file", help=".env file with FRACTAL_* settings")
    return parser


@dataclass
class Outcome:
    report: Dict[str, Any]
    exit_code: int = EXIT_OK
    stdout: List[str] = field(default_factory=list)


@dataclass
class CommandContext:
    """Parsed arguments with the loaded problem and effective settings."""
    command: str
    args: argparse.Namespace
    settings: SolverSettings
    extractor: ProblemExtractor
    problem: ProblemFile
    space: Optional[SpaceSpec]
    output: Path

    @property
    def name(self) -> str:
        return f"{Path(self.args.input).stem}.{self.command}"

    @property
    def tol(self) -> float:
        return self.extractor.resolve_tol(self.problem, self.args.tol)

    @property
    def seed(self) -> int:
        return self.settings.seed if self.args.seed is None else self.args.seed

    def spec(self) -> IfsSpec:
        return self.extractor.build_spec(self.problem, self.space, self.args.grid_level)

    def template(self) -> FractalTemplate:
        return self.extractor.build_template(self.problem, self.space, self.args.grid_level, self.args.tol)

    def write(self, filename: str, text: str) -> Path:
        target = self.output / filename
        target.write_text(text, encoding="utf-8")
        logger.info("wrote %s", target)
        return target

    def write_curve(self, filename: str, curve: GridFunction) -> Path:
        return curve.write_csv(self.output / filename, order=0)


def _dumps(data: Dict[str, Any]) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _spec_summary(spec: IfsSpec) -> Dict[str, Any]:
    return {
        "knots": list(spec.partition.knots),
        "scaling": [json_number(e.value) if e.kind == "const" else "sampled" for e in spec.scaling.entries],
        "base": spec.base.label,
        "space": spec.space.label,
        "grid_nodes": spec.seed.size,
    }


# ---------------------------------------------------------------------- #
# command handlers


def cmd_eval(ctx: CommandContext) -> Outcome:
    spec = ctx.spec()
    rb = RBOperator(spec, ctx.settings.endpoint_tol)
    result = rb.fixed_point(ctx.tol, ctx.settings.max_iter)
    knots = np.asarray(result.knots)
    knot_error = float(np.max(np.abs(np.asarray(result.falpha.eval(knots)) - np.asarray(spec.seed.eval(knots)))))
    ctx.write_curve(f"{ctx.name}.csv", result.falpha)
    return Outcome({
        "spec": _spec_summary(spec),
        "contraction": contraction_factor(spec).to_json_dict(),
        "fixed_point": result.to_json_dict(),
        "knot_error": json_number(knot_error),
        "self_ref_residual": json_number(rb.self_ref_residual(result.falpha)),
    })


def cmd_verify(ctx: CommandContext) -> Outcome:
    spec = ctx.spec()
    validation = validate_spec(spec, ctx.settings.endpoint_tol)
    contraction = contraction_factor(spec)
    report = {**contraction.to_json_dict(), "validation": validation.to_json_dict()}
    ok = contraction.satisfied and not validation.blocking_failures

    width = max([len("condition")] + [len(c.name) for c in validation.checks])
    lines = [
        f"{'space':<{width}}  {spec.space.label}",
        f"{'factor':<{width}}  {contraction.factor:.12g}",
        f"{'condition':<{width}}  {contraction.condition_text}",
        f"{'satisfied':<{width}}  {str(contraction.satisfied).lower()}",
    ]
    for check in validation.checks:
        mark = "pass" if check.passed else "FAIL"
        lines.append(f"{check.name:<{width}}  {mark}  {check.detail}")
    return Outcome(report, EXIT_OK if ok else EXIT_INVALID, lines)


def cmd_perturb_bound(ctx: CommandContext) -> Outcome:
    template = ctx.template()
    f = ctx.spec().seed
    report = perturbation_bounds(template, f, BOUND_TOL)
    below = bounded_below_check(template, f, BOUND_TOL)
    two_sided = automorphism_bounds(template, f, BOUND_TOL)
    return Outcome(
        {
            "template": template.describe(),
            "perturbation": report.to_json_dict(),
            "bounded_below": below.to_json_dict(),
            "automorphism": two_sided.to_json_dict(),
        },
        EXIT_OK if report.satisfied else EXIT_INVALID,
    )


def cmd_opnorm(ctx: CommandContext) -> Outcome:
    template = ctx.template()
    trials = DEFAULT_TRIALS if ctx.args.terms is None else ctx.args.terms
    lower = operator_norm_lower_bound(template, trials, ctx.seed)
    upper = operator_norm_upper_bound(template)
    dev_lower = deviation_norm_lower_bound(template, trials, ctx.seed)
    dev_upper = deviation_norm_upper_bound(template)
    base_lower = base_operator_norm_lower_bound(template, trials, ctx.seed)
    consistent = (
        lower <= upper + BOUND_TOL
        and dev_lower <= dev_upper + BOUND_TOL
        and base_lower <= template.norm_L + BOUND_TOL
    )
    return Outcome(
        {
            "template": template.describe(),
            "K": json_number(template.K),
            "trials": trials,
            "seed": ctx.seed,
            "operator_norm_lower": json_number(lower),
            "operator_norm_upper": json_number(upper),
            "deviation_norm_lower": json_number(dev_lower),
            "deviation_norm_upper": json_number(dev_upper),
            "base_norm_lower": json_number(base_lower),
            "base_norm_bound": json_number(template.norm_L),
            "consistent": consistent,
        },
        EXIT_OK if consistent else EXIT_INVALID,
    )


def cmd_invert(ctx: CommandContext) -> Outcome:
    template = ctx.template()
    g = ctx.spec().seed
    result = neumann_expansion(template, g, ctx.settings.neumann_tol, ctx.settings.neumann_max_terms)
    residual = (falpha_operator(template, result.inverse) - g).sup_norm()
    ctx.write_curve(f"{ctx.name}.csv", result.inverse)
    return Outcome({
        "template": template.describe(),
        "automorphism_condition": json_number(template.automorphism_condition),
        "terms": result.terms,
        "last_term_norm": json_number(result.last_term_norm),
        "residual_sup": json_number(residual),
    })


def cmd_basis(ctx: CommandContext) -> Outcome:
    template = ctx.template()
    level = ctx.problem.basis.level if ctx.problem.basis and ctx.problem.basis.level is not None else None
    if level is None:
        level = ladder_level_for(template.space)
    count = DEFAULT_BASIS_TERMS if ctx.args.terms is None else ctx.args.terms
    ladder = build_ladder(level, count, template.grid_level)
    fbasis = fractalize_basis(ladder, template)
    for n, element in enumerate(fbasis.elements, start=1):
        ctx.write_curve(f"{ctx.name}.{n}.csv", element)
    seed = ctx.spec().seed
    result = reconstruct(fbasis, seed, count, None, ctx.settings.neumann_tol, ctx.settings.neumann_max_terms)
    return Outcome({
        "level": level,
        "count": count,
        "template": template.describe(),
        "gram_condition": json_number(ladder.gram_condition),
        "coefficients": [json_number(c) for c in result.coefficients],
        "errors_by_n": {str(n): json_number(e) for n, e in enumerate(result.errors, start=1)},
    })


def cmd_attractor(ctx: CommandContext) -> Outcome:
    spec = ctx.spec()
    n_points = DEFAULT_ATTRACTOR_POINTS if ctx.args.terms is None else ctx.args.terms
    points = chaos_game(spec, n_points, ctx.seed, ctx.settings.burn_in)
    ctx.write(f"{ctx.name}.csv", columns_to_csv(points[:, 0], {"y": points[:, 1]}))
    return Outcome({
        "spec": _spec_summary(spec),
        "points": int(points.shape[0]),
        "seed": ctx.seed,
        "burn_in": ctx.settings.burn_in,
    })


def cmd_export(ctx: CommandContext) -> Outcome:
    spec = ctx.spec()
    rb = RBOperator(spec, ctx.settings.endpoint_tol)
    falpha = rb.fixed_point(ctx.tol, ctx.settings.max_iter).falpha
    k = spec.requires_derivatives
    derivative_source = "finite_difference"
    if spec.space.kind == "ck" and k >= 1:
        try:
            falpha = derivative_stack(spec, falpha, ctx.tol, ctx.settings.max_iter)
            derivative_source = "recursion"
        except HypothesisViolated as e:
            logger.warning("derivative recursion unavailable (%s); exporting finite differences", e)

    columns: Dict[str, np.ndarray] = {}
    for label, fn in (("seed", spec.seed), ("base", rb.base), ("falpha", falpha)):
        columns[label] = fn.samples
        for r in range(1, k + 1):
            columns[f"{label}_d{r}"] = fn.derivative(r).samples
    ctx.write(f"{ctx.name}.csv", columns_to_csv(spec.seed.nodes, columns))
    return Outcome({
        "spec": _spec_summary(spec),
        "columns": list(columns),
        "derivatives": derivative_source if k else None,
    })


HANDLERS: Dict[str, Callable[[CommandContext], Outcome]] = {
    "eval": cmd_eval,
    "verify": cmd_verify,
    "perturb-bound": cmd_perturb_bound,
    "opnorm": cmd_opnorm,
    "invert": cmd_invert,
    "basis": cmd_basis,
    "attractor": cmd_attractor,
    "export": cmd_export,
}


# ---------------------------------------------------------------------- #
# entry point


def _exit_code_for(error: BaseException) -> int:
    if isinstance(error, (NotContractive, HypothesisViolated)):
        return EXIT_INVALID
    if isinstance(error, (ProblemFileError, ExpressionError, MaxIterExceeded, MaxTermsExceeded)):
        return EXIT_ERROR
    if isinstance(error, FractalError) and isinstance(error, ValueError):
        return EXIT_INVALID
    return EXIT_ERROR


def _error_payload(command: Optional[str], error: BaseException) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "status": "error",
        "error": {"type": type(error).__name__, "message": str(error)},
    }
    report = getattr(error, "report", None)
    if report is not None and hasattr(report, "to_json_dict"):
        payload["report"] = report.to_json_dict()
    return payload


def run(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    command = argv[0] if argv and argv[0] in COMMANDS else None
    ctx: Optional[CommandContext] = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        config = Config(args.env_file)
        configure_logging(args.log_level or config.log_level)
        logger.debug("configuration %s", config.as_dict())
        try:
            settings = config.solver_settings
        except (ValueError, ValidationError) as e:
            raise ProblemFileError(f"invalid FRACTAL_* configuration: {e}") from e
        extractor = ProblemExtractor(settings)
        problem = extractor.load(args.input)
        space = SpaceSpec.parse(args.space) if args.space else None
        output = Path(args.output)
        output.mkdir(parents=True, exist_ok=True)
        ctx = CommandContext(command, args, settings, extractor, problem, space, output)

        outcome = HANDLERS[command](ctx)
        status = "ok" if outcome.exit_code == EXIT_OK else "failed"
        payload = {"schema": SCHEMA_VERSION, "command": command, "status": status, **outcome.report}
        ctx.write(f"{ctx.name}.report.json", _dumps(payload))
        for line in outcome.stdout:
            print(line)
        print(_dumps(payload), end="")
        if outcome.exit_code != EXIT_OK:
            print(f"{command}: validation failed", file=sys.stderr)
        return outcome.exit_code
    except (UsageError, FractalError, OSError) as e:
        code = EXIT_ERROR if isinstance(e, (UsageError, OSError)) else _exit_code_for(e)
        payload = _error_payload(command, e)
        if ctx is not None:
            try:
                ctx.write(f"{ctx.name}.report.json", _dumps(payload))
            except OSError:
                logger.warning("cannot write the error report to %s", ctx.output)
        print(_dumps(payload), end="")
        print(f"error: {e}", file=sys.stderr)
        return code


def main() -> None:
    sys.exit(run())
