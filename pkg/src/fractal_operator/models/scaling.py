"""
Scaling profiles: one vertical scaling per subinterval, constant or sampled.
"""
from typing import List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..grid.grid_function import GridFunction

ScalingKind = Literal["const", "sampled"]


class ScalingEntry(BaseModel):
    """Scaling alpha_i on one subinterval: a constant or a grid function on I."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: ScalingKind = Field(..., description="const or sampled")
    value: Optional[float] = Field(None, description="Constant scaling value")
    function: Optional[GridFunction] = Field(None, description="Sampled scaling function on I")

    @model_validator(mode="after")
    def check_payload(self) -> "ScalingEntry":
        """Exactly the payload matching the kind."""
        if self.kind == "const" and (self.value is None or self.function is not None):
            raise ValueError("a constant scaling carries a value only")
        if self.kind == "sampled" and (self.function is None or self.value is not None):
            raise ValueError("a sampled scaling carries a grid function only")
        if self.value is not None and not np.isfinite(self.value):
            raise ValueError("scaling value must be finite")
        return self

    @classmethod
    def constant(cls, value: float) -> "ScalingEntry":
        return cls(kind="const", value=float(value))

    @classmethod
    def sampled(cls, function: GridFunction) -> "ScalingEntry":
        return cls(kind="sampled", function=function)

    @property
    def sup_magnitude(self) -> float:
        """||alpha_i||_inf."""
        if self.kind == "const":
            return abs(self.value)
        return self.function.sup_norm()

    def evaluate(self, u: np.ndarray) -> np.ndarray:
        """alpha_i(u) for abscissae u in I."""
        u = np.asarray(u, dtype=float)
        if self.kind == "const":
            return np.full(u.shape, self.value)
        return np.asarray(self.function.eval(u), dtype=float)

    def derivative_at(self, order: int, u: np.ndarray) -> np.ndarray:
        """alpha_i^(order)(u); constants have vanishing derivatives."""
        if order == 0:
            return self.evaluate(u)
        u = np.asarray(u, dtype=float)
        if self.kind == "const":
            return np.zeros(u.shape)
        return np.asarray(self.function.derivative(order).eval(u), dtype=float)

    def ck_norm(self, k: int) -> float:
        """||alpha_i||_{C^k} = max over r <= k of sup |alpha_i^(r)|."""
        if self.kind == "const":
            return abs(self.value)
        return max(self.function.derivative(r).sup_norm() for r in range(k + 1))


class ScalingProfile(BaseModel):
    """Scale vector alpha = (alpha_1, ..., alpha_{N-1}) of one uniform kind."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    entries: List[ScalingEntry] = Field(..., min_length=1, description="One entry per subinterval")

    @model_validator(mode="after")
    def check_uniform_kind(self) -> "ScalingProfile":
        """All entries share one kind."""
        kinds = {e.kind for e in self.entries}
        if len(kinds) > 1:
            raise ValueError("scaling entries must all be constant or all sampled")
        return self

    @classmethod
    def constant(cls, values: Sequence[float]) -> "ScalingProfile":
        return cls(entries=[ScalingEntry.constant(v) for v in values])

    @classmethod
    def sampled(cls, functions: Sequence[GridFunction]) -> "ScalingProfile":
        return cls(entries=[ScalingEntry.sampled(f) for f in functions])

    @classmethod
    def zeros(cls, count: int) -> "ScalingProfile":
        return cls.constant([0.0] * count)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def kind(self) -> ScalingKind:
        return self.entries[0].kind

    @property
    def is_constant(self) -> bool:
        return self.kind == "const"

    @property
    def values(self) -> np.ndarray:
        """Constant values alpha_i; only defined for constant profiles."""
        if not self.is_constant:
            raise ValueError("sampled scaling profiles have no constant values")
        return np.array([e.value for e in self.entries])

    @property
    def sup_magnitudes(self) -> np.ndarray:
        return np.array([e.sup_magnitude for e in self.entries])

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.sup_magnitudes == 0.0))

    def ck_norms(self, k: int) -> np.ndarray:
        return np.array([e.ck_norm(k) for e in self.entries])

    def evaluate(self, index: np.ndarray, u: np.ndarray) -> np.ndarray:
        """alpha_{index_j}(u_j) for paired arrays of subinterval indices and abscissae."""
        return self.derivative_at(0, index, u)

    def derivative_at(self, order: int, index: np.ndarray, u: np.ndarray) -> np.ndarray:
        index = np.asarray(index)
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        for i, entry in enumerate(self.entries):
            mask = index == i
            if np.any(mask):
                out[mask] = entry.derivative_at(order, u[mask])
        return out
