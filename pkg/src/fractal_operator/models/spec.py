"""
Problem specifications: partition, scaling, seed, base rule and space.
"""
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..grid.grid_function import GridFunction
from ..operators.base_operators import LinearBaseOperator
from .partition import Partition
from .scaling import ScalingProfile
from .space import SpaceSpec


class BaseRule(BaseModel):
    """Base function b: either given explicitly or produced as b = Lf."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["explicit", "operator"] = Field(..., description="explicit or operator")
    function: Optional[GridFunction] = Field(None, description="Explicit base function b")
    operator: Optional[LinearBaseOperator] = Field(None, description="Linear operator L with b = Lf")

    @model_validator(mode="after")
    def check_payload(self) -> "BaseRule":
        if self.kind == "explicit" and self.function is None:
            raise ValueError("an explicit base rule needs a function")
        if self.kind == "operator" and self.operator is None:
            raise ValueError("an operator base rule needs an operator")
        return self

    @classmethod
    def explicit(cls, b: GridFunction) -> "BaseRule":
        return cls(kind="explicit", function=b)

    @classmethod
    def from_operator(cls, operator: LinearBaseOperator) -> "BaseRule":
        return cls(kind="operator", operator=operator)

    def resolve(self, seed: GridFunction) -> GridFunction:
        """The base function for the given seed."""
        if self.kind == "explicit":
            return self.function
        return self.operator.apply(seed)

    @property
    def label(self) -> str:
        return "explicit" if self.kind == "explicit" else self.operator.label


class IfsSpec(BaseModel):
    """Complete problem statement (partition, alpha, f, b, space)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    partition: Partition = Field(..., description="Knots of the interval")
    scaling: ScalingProfile = Field(..., description="One scaling per subinterval")
    seed: GridFunction = Field(..., description="Seed function f; its grid is the working grid")
    base: BaseRule = Field(..., description="Base function rule")
    space: SpaceSpec = Field(default_factory=SpaceSpec.bounded, description="Ambient function space")

    @property
    def requires_derivatives(self) -> int:
        return self.space.requires_derivatives

    @property
    def domain(self):
        return self.partition.domain

    def with_space(self, space: SpaceSpec) -> "IfsSpec":
        return self.model_copy(update={"space": space})

    def with_scaling(self, scaling: ScalingProfile) -> "IfsSpec":
        return self.model_copy(update={"scaling": scaling})

    def with_seed(self, seed: GridFunction) -> "IfsSpec":
        return self.model_copy(update={"seed": seed})

    def with_base(self, base: BaseRule) -> "IfsSpec":
        return self.model_copy(update={"base": base})
