"""
Partitions of the interval and the affine maps L_i they induce.
"""
from typing import List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

ArrayLike = Union[float, np.ndarray]

# Round-trip tolerance of the affine maps, relative to the interval length.
AFFINE_TOL = 1e-12


class AffineMap(BaseModel):
    """L(x) = a x + d, mapping the whole interval onto one subinterval."""
    model_config = ConfigDict(frozen=True)

    a: float = Field(..., gt=0, lt=1, description="Slope, the subinterval length ratio")
    d: float = Field(..., description="Intercept")
    source: Tuple[float, float] = Field(..., description="Domain [x_1, x_N] of the map")

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return self.a * x + self.d

    @property
    def image(self) -> Tuple[float, float]:
        """Image interval [L(x_1), L(x_N)]."""
        return self.a * self.source[0] + self.d, self.a * self.source[1] + self.d

    def inverse(self, x: ArrayLike) -> ArrayLike:
        """(x - d) / a without range checks."""
        return (x - self.d) / self.a


class Partition(BaseModel):
    """Strictly increasing knots x_1 < ... < x_N of the interval I = [x_1, x_N]."""
    model_config = ConfigDict(frozen=True)

    knots: List[float] = Field(..., min_length=3, description="Knot abscissae")

    @field_validator("knots")
    @classmethod
    def check_increasing(cls, v: List[float]) -> List[float]:
        """Reject duplicate or decreasing knots."""
        values = np.asarray(v, dtype=float)
        if not np.all(np.isfinite(values)):
            raise ValueError("knots must be finite")
        if np.any(np.diff(values) <= 0):
            raise ValueError("knots must be strictly increasing")
        return [float(x) for x in values]

    @property
    def n_knots(self) -> int:
        return len(self.knots)

    @property
    def n_intervals(self) -> int:
        return len(self.knots) - 1

    @property
    def domain(self) -> Tuple[float, float]:
        return self.knots[0], self.knots[-1]

    @property
    def length(self) -> float:
        return self.knots[-1] - self.knots[0]

    @property
    def lengths(self) -> np.ndarray:
        """Subinterval lengths x_{i+1} - x_i."""
        return np.diff(np.asarray(self.knots))

    @property
    def ratios(self) -> np.ndarray:
        """Slopes a_i = (x_{i+1} - x_i) / (x_N - x_1)."""
        return self.lengths / self.length

    @property
    def intercepts(self) -> np.ndarray:
        """Intercepts d_i = x_i - a_i x_1."""
        return np.asarray(self.knots[:-1]) - self.ratios * self.knots[0]

    @property
    def maps(self) -> List[AffineMap]:
        return [
            AffineMap(a=float(a), d=float(d), source=self.domain)
            for a, d in zip(self.ratios, self.intercepts)
        ]

    @property
    def is_uniform(self) -> bool:
        lengths = self.lengths
        return bool(np.allclose(lengths, lengths[0], rtol=0.0, atol=AFFINE_TOL * self.length))

    def subinterval_index(self, x: ArrayLike) -> np.ndarray:
        """Owning subinterval of x; interior knot x_i belongs to subinterval i, the last is closed."""
        idx = np.searchsorted(np.asarray(self.knots), x, side="right") - 1
        return np.clip(idx, 0, self.n_intervals - 1)
