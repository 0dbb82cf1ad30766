"""
JSON problem files: schema models and the builder of specs and templates.

    {
      "knots": [0, 0.5, 1],
      "alpha": {"kind": "const", "values": [0.4, 0.4]},
      "seed":  {"kind": "expr", "expr": "x^2"},
      "base":  {"kind": "explicit", "expr": "x"},
      "space": "lp:2",
      "grid_level": 12,
      "tol": 1e-12
    }

alpha may be {"kind": "sampled", "exprs": [...]} or {"kind": "sampled",
"samples": [[...], ...]}; seed and explicit bases take "expr" or "values";
operator bases are {"kind": "operator", "name": "endpoint_line" | "blend" |
"table", ...}.
"""
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..core.ifs import build_partition
from ..exceptions import ProblemFileError, SpecInvalid
from ..grid.grid_function import GridFunction
from ..models.partition import Partition
from ..models.scaling import ScalingProfile
from ..models.settings import SolverSettings
from ..models.space import SpaceSpec
from ..models.spec import BaseRule, IfsSpec
from ..operators.base_operators import EndpointLine, LinearBaseOperator, ScaledIdentityBlend, TableRow, UserTable
from ..operators.fractal_operator import FractalTemplate
from .expressions import expression_function

logger = logging.getLogger(__name__)


class FunctionSection(BaseModel):
    """A function given by an expression or by uniform samples."""
    kind: Literal["expr", "samples"] = Field(..., description="expr or samples")
    expr: Optional[str] = Field(None, description="Expression in x")
    values: Optional[List[float]] = Field(None, description="Uniform samples over the interval")

    @model_validator(mode="after")
    def check_payload(self) -> "FunctionSection":
        if self.kind == "expr" and not self.expr:
            raise ValueError("an expr function needs 'expr'")
        if self.kind == "samples" and not self.values:
            raise ValueError("a samples function needs 'values'")
        return self


class AlphaSection(BaseModel):
    kind: Literal["const", "sampled"] = Field(..., description="const or sampled")
    values: Optional[List[float]] = Field(None, description="Constant scalings")
    exprs: Optional[List[str]] = Field(None, description="Scaling functions as expressions")
    samples: Optional[List[List[float]]] = Field(None, description="Scaling functions as uniform samples")

    @model_validator(mode="after")
    def check_payload(self) -> "AlphaSection":
        if self.kind == "const" and self.values is None:
            raise ValueError("constant scaling needs 'values'")
        if self.kind == "sampled" and (self.exprs is None) == (self.samples is None):
            raise ValueError("sampled scaling needs exactly one of 'exprs' or 'samples'")
        return self


class TableRowSection(BaseModel):
    point: float
    order: int = Field(0, ge=0)
    profile: str = Field(..., description="Profile expression in x")


class BaseSection(BaseModel):
    kind: Literal["explicit", "operator"] = Field(..., description="explicit or operator")
    expr: Optional[str] = Field(None, description="Explicit base expression")
    values: Optional[List[float]] = Field(None, description="Explicit base samples")
    name: Optional[Literal["endpoint_line", "blend", "table"]] = Field(None, description="Operator name")
    lam: Optional[float] = Field(None, alias="lambda", description="Blend weight")
    rows: Optional[List[TableRowSection]] = Field(None, description="Table rows")
    norm_bound: Optional[float] = Field(None, description="Supplied ||L|| bound for tables")
    deviation_bound: Optional[float] = Field(None, description="Supplied ||I_d - L|| bound for tables")

    model_config = ConfigDict(populate_by_name=True)

    @model_validator(mode="after")
    def check_payload(self) -> "BaseSection":
        if self.kind == "explicit" and (self.expr is None) == (self.values is None):
            raise ValueError("an explicit base needs exactly one of 'expr' or 'values'")
        if self.kind == "operator":
            if self.name is None:
                raise ValueError("an operator base needs 'name'")
            if self.name == "blend" and self.lam is None:
                raise ValueError("a blend operator needs 'lambda'")
            if self.name == "table" and (not self.rows or self.norm_bound is None):
                raise ValueError("a table operator needs 'rows' and 'norm_bound'")
        return self


class BasisSection(BaseModel):
    level: Optional[int] = Field(None, ge=0, description="Ladder level; defaults to the space order")


class ProblemFile(BaseModel):
    """Validated contents of a JSON problem file."""
    knots: List[float] = Field(..., description="Partition knots")
    alpha: AlphaSection
    seed: FunctionSection
    base: BaseSection
    space: Union[str, Dict[str, Any]] = Field("bounded", description="Space text or object")
    grid_level: Optional[int] = Field(None, ge=1, le=20)
    tol: Optional[float] = Field(None, gt=0)
    basis: Optional[BasisSection] = None


def space_from_json(value: Union[str, Dict[str, Any]]) -> SpaceSpec:
    """SpaceSpec from 'lp:2' style text or {"kind": ..., "p": ..., "k": ..., "sigma": ...}."""
    if isinstance(value, str):
        return SpaceSpec.parse(value)
    data = dict(value)
    try:
        if isinstance(data.get("p"), str):
            data["p"] = math.inf if data["p"].lower() in ("inf", "infinity") else float(data["p"])
        return SpaceSpec(**data)
    except ValidationError as e:
        raise SpecInvalid(f"invalid space {value}: {e.errors()[0]['msg']}") from e
    except ValueError as e:
        raise SpecInvalid(f"invalid space {value}: {e}") from e


class ProblemExtractor:
    """Turns problem files into specs and fractal templates."""

    def __init__(self, settings: Optional[SolverSettings] = None):
        self.settings = settings or SolverSettings()

    def load(self, path: Union[str, Path]) -> ProblemFile:
        """Read and validate a JSON problem file."""
        source = Path(path)
        try:
            data = json.loads(source.read_text(encoding="utf-8"))
        except OSError as e:
            raise ProblemFileError(f"cannot read {source}: {e}") from e
        except json.JSONDecodeError as e:
            raise ProblemFileError(f"{source} is not valid JSON: {e}") from e
        return self.parse(data)

    def parse(self, data: Any) -> ProblemFile:
        if not isinstance(data, dict):
            raise ProblemFileError("a problem file holds a JSON object")
        try:
            return ProblemFile.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            where = ".".join(str(p) for p in first["loc"])
            raise ProblemFileError(f"problem file field {where}: {first['msg']}") from e

    def resolve_space(self, problem: ProblemFile, space: Optional[SpaceSpec] = None) -> SpaceSpec:
        return space or space_from_json(problem.space)

    def resolve_level(self, problem: ProblemFile, grid_level: Optional[int] = None) -> int:
        """CLI flag, then problem file, then settings."""
        if grid_level is not None:
            return grid_level
        if problem.grid_level is not None:
            return problem.grid_level
        return self.settings.grid_level

    def resolve_tol(self, problem: ProblemFile, tol: Optional[float] = None) -> float:
        if tol is not None:
            return tol
        if problem.tol is not None:
            return problem.tol
        return self.settings.tol

    # ------------------------------------------------------------------ #

    def _function(self, section: FunctionSection, domain, level: int, order: int) -> GridFunction:
        if section.kind == "expr":
            return expression_function(section.expr, domain, level, order)
        return GridFunction.from_samples(section.values, domain, level)

    def _scaling(self, section: AlphaSection, domain, level: int, order: int) -> ScalingProfile:
        if section.kind == "const":
            return ScalingProfile.constant(section.values)
        if section.exprs is not None:
            return ScalingProfile.sampled([expression_function(e, domain, level, order) for e in section.exprs])
        return ScalingProfile.sampled([GridFunction.from_samples(s, domain, level) for s in section.samples])

    def _operator(self, section: BaseSection, partition: Partition, level: int, order: int) -> LinearBaseOperator:
        if section.name == "endpoint_line":
            return EndpointLine(partition.length)
        if section.name == "blend":
            return ScaledIdentityBlend(section.lam, partition.length)
        rows = [
            TableRow(point=r.point, order=r.order, profile=expression_function(r.profile, partition.domain, level, order))
            for r in section.rows
        ]
        return UserTable(rows, section.norm_bound, section.deviation_bound)

    def build_spec(
        self,
        problem: ProblemFile,
        space: Optional[SpaceSpec] = None,
        grid_level: Optional[int] = None,
    ) -> IfsSpec:
        """IfsSpec of the problem with the effective space and grid level."""
        space = self.resolve_space(problem, space)
        level = self.resolve_level(problem, grid_level)
        order = space.requires_derivatives
        try:
            partition = build_partition(problem.knots)
            domain = partition.domain
            seed = self._function(problem.seed, domain, level, order)
            scaling = self._scaling(problem.alpha, domain, level, order)
            if problem.base.kind == "explicit":
                if problem.base.expr is not None:
                    section = FunctionSection(kind="expr", expr=problem.base.expr)
                else:
                    section = FunctionSection(kind="samples", values=problem.base.values)
                base = BaseRule.explicit(self._function(section, domain, level, order))
            else:
                base = BaseRule.from_operator(self._operator(problem.base, partition, level, order))
            return IfsSpec(partition=partition, scaling=scaling, seed=seed, base=base, space=space)
        except ValidationError as e:
            raise SpecInvalid(f"invalid problem: {e.errors()[0]['msg']}") from e

    def build_template(
        self,
        problem: ProblemFile,
        space: Optional[SpaceSpec] = None,
        grid_level: Optional[int] = None,
        tol: Optional[float] = None,
    ) -> FractalTemplate:
        """FractalTemplate of a problem whose base is a linear operator."""
        if problem.base.kind != "operator":
            raise ProblemFileError("this command needs an operator base (\"base\": {\"kind\": \"operator\", ...})")
        spec = self.build_spec(problem, space, grid_level)
        try:
            return FractalTemplate(
                partition=spec.partition,
                scaling=spec.scaling,
                base_operator=spec.base.operator,
                space=spec.space,
                grid_level=self.resolve_level(problem, grid_level),
                tol=self.resolve_tol(problem, tol),
                max_iter=self.settings.max_iter,
                endpoint_tol=self.settings.endpoint_tol,
                hoelder_subsample=self.settings.hoelder_subsample,
            )
        except ValidationError as e:
            raise SpecInvalid(f"invalid template: {e.errors()[0]['msg']}") from e
