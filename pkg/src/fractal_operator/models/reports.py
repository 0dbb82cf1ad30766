"""
Result and report models returned by the library operations.
"""
import math
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..grid.grid_function import GridFunction
from .space import SpaceSpec


def json_number(value: Optional[float]) -> Optional[float]:
    """Finite floats as-is, infinities and NaN as None."""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


class CheckResult(BaseModel):
    """One hypothesis check with the computed quantity."""
    name: str = Field(..., description="Check identifier")
    value: Optional[float] = Field(None, description="Computed quantity")
    threshold: Optional[float] = Field(None, description="Threshold compared against")
    passed: bool = Field(..., description="Whether the hypothesis holds")
    blocking: bool = Field(False, description="Whether apply_rb refuses the spec on failure")
    detail: str = Field("", description="Human-readable condition")

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "value": json_number(self.value),
            "threshold": json_number(self.threshold),
            "passed": self.passed,
            "blocking": self.blocking,
            "detail": self.detail,
        }


class ValidationReport(BaseModel):
    """All hypothesis checks relevant to a spec's space."""
    space: str = Field(..., description="Space label")
    checks: List[CheckResult] = Field(default_factory=list, description="Individual checks")

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def blocking_failures(self) -> List[CheckResult]:
        return [c for c in self.checks if c.blocking and not c.passed]

    @property
    def failed(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]

    def check(self, name: str) -> Optional[CheckResult]:
        for c in self.checks:
            if c.name == name:
                return c
        return None

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "space": self.space,
            "passed": self.passed,
            "checks": [c.to_json_dict() for c in self.checks],
        }


class ContractionReport(BaseModel):
    """Contraction factor K of a space and whether K < 1."""
    model_config = ConfigDict(frozen=True)

    space: SpaceSpec = Field(..., description="Space the factor belongs to")
    factor: float = Field(..., description="Closed-form contraction factor")
    condition_text: str = Field(..., description="Rendered inequality")
    satisfied: bool = Field(..., description="factor < 1 and, for Ck, the per-interval hypothesis")
    hypothesis_satisfied: Optional[bool] = Field(None, description="Ck hypothesis ||alpha_i||_{C^k} <= (a_i/2)^k")
    hypothesis_margins: Optional[List[float]] = Field(None, description="(a_i/2)^k - ||alpha_i||_{C^k} per interval")

    @property
    def contractive(self) -> bool:
        """Factor below one; the fixed-point iteration only needs this."""
        return self.factor < 1.0

    def to_json_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "space": self.space.label,
            "factor": json_number(self.factor),
            "satisfied": self.satisfied,
            "condition": self.condition_text,
        }
        if self.hypothesis_satisfied is not None:
            data["hypothesis_satisfied"] = self.hypothesis_satisfied
            data["hypothesis_margins"] = [json_number(m) for m in self.hypothesis_margins or []]
        return data


class FixedPointResult(BaseModel):
    """Converged fixed point f^alpha with iteration statistics."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    falpha: GridFunction = Field(..., description="Fixed point on the grid")
    iterations: int = Field(..., description="Applications of T performed")
    final_residual: float = Field(..., description="Sup norm of the last successive difference")
    contraction_estimate: float = Field(..., description="Largest observed residual ratio")
    residuals: List[float] = Field(default_factory=list, description="Residual after each iteration")
    snap_error: float = Field(0.0, description="Largest knot-to-node distance")
    knots: List[float] = Field(default_factory=list, description="Knots on the grid the iteration used")

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "iterations": self.iterations,
            "final_residual": json_number(self.final_residual),
            "contraction_estimate": json_number(self.contraction_estimate),
            "snap_error": json_number(self.snap_error),
            "knots": [json_number(x) for x in self.knots],
        }


class PerturbationReport(BaseModel):
    """Distance of f^alpha from f against its a priori bounds."""
    space: str = Field(..., description="Space label")
    K: float = Field(..., description="Space-matched contraction factor")
    norm_L: float = Field(..., description="Bound of ||L||")
    deviation_L: float = Field(..., description="Bound of ||I_d - L||")
    lhs: float = Field(..., description="||f^alpha - f||")
    bound_prop: float = Field(..., description="K ||f^alpha - b||")
    bound_thm: float = Field(..., description="K/(1-K) ||I_d - L|| ||f||")
    bound_thm_sharp: float = Field(..., description="K/(1-K) ||f - Lf||")
    satisfied_prop: bool = Field(..., description="lhs <= bound_prop + slack")
    satisfied_thm: bool = Field(..., description="lhs <= bound_thm + slack and lhs <= bound_thm_sharp + slack")
    sup_K: float = Field(..., description="max ||alpha_i||_inf")
    sup_lhs: float = Field(..., description="||f^alpha - f||_inf")
    sup_bound_prop: float = Field(..., description="sup_K ||f^alpha - b||_inf")
    sup_bound_thm: float = Field(..., description="sup_K/(1-sup_K) ||I_d - L||_inf ||f||_inf")
    sup_bound_thm_sharp: float = Field(..., description="sup_K/(1-sup_K) ||f - Lf||_inf")
    sup_satisfied: bool = Field(..., description="All sup-norm inequalities hold")

    @property
    def satisfied(self) -> bool:
        return self.satisfied_prop and self.satisfied_thm and self.sup_satisfied

    def to_json_dict(self) -> Dict[str, Any]:
        data = {k: (json_number(v) if isinstance(v, float) else v) for k, v in self.model_dump().items()}
        data["satisfied"] = self.satisfied
        return data


class BoundedBelowReport(BaseModel):
    """||f|| <= (1+K)/(1-K||L||) ||F^alpha f|| when K < min(1, 1/||L||)."""
    space: str
    K: float
    norm_L: float
    applicable: bool = Field(..., description="K < min(1, 1/||L||)")
    constant: Optional[float] = Field(None, description="(1+K)/(1-K||L||)")
    norm_f: float
    norm_image: float
    satisfied: bool

    def to_json_dict(self) -> Dict[str, Any]:
        return {k: (json_number(v) if isinstance(v, float) else v) for k, v in self.model_dump().items()}


class AutomorphismReport(BaseModel):
    """Two-sided bound ((1-K||L||)/(1+K)) ||f|| <= ||F^alpha f|| <= (1 + K/(1-K) ||I_d-L||) ||f||."""
    space: str
    K: float
    norm_L: float
    deviation_L: float
    applicable: bool = Field(..., description="K (1 + ||I_d - L||) < 1")
    lower_constant: float
    upper_constant: float
    norm_f: float
    norm_image: float
    satisfied: bool

    def to_json_dict(self) -> Dict[str, Any]:
        return {k: (json_number(v) if isinstance(v, float) else v) for k, v in self.model_dump().items()}


class NeumannResult(BaseModel):
    """Truncated Neumann series sum_j (I_d - F^alpha)^j g."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    inverse: GridFunction = Field(..., description="Approximation of (F^alpha)^{-1} g")
    terms: int = Field(..., description="Terms summed after the zeroth")
    last_term_norm: float = Field(..., description="Space norm of the last term")
    term_norms: List[float] = Field(default_factory=list)


class Reconstruction(BaseModel):
    """Partial sum of a fractal basis expansion and its error curve."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    approximation: GridFunction
    coefficients: np.ndarray
    errors: List[float] = Field(..., description="Space-norm error for 1..n_terms terms")
    space: str
