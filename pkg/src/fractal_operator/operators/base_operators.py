"""
Linear base operators L with b = Lf, and their operator-norm bounds.

Bounds for the built-in operators follow docs/base_operator_bounds.md:
||L|| <= 2 E ||phi||_X where E bounds point evaluation in X and phi is a
linear hat on the interval, and ||I_d - L|| <= 1 + ||L||. Point evaluation
is unbounded on Lp for p < inf, so those bounds are infinite.
"""
import logging
import math
from abc import ABC, abstractmethod
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..exceptions import SpecInvalid
from ..grid.grid_function import GridFunction
from ..models.space import SpaceSpec

logger = logging.getLogger(__name__)


class LinearBaseOperator(ABC):
    """Bounded linear map L with (Lf)(x_1) = f(x_1) and (Lf)(x_N) = f(x_N)."""

    kind: str = "abstract"

    @abstractmethod
    def apply(self, f: GridFunction) -> GridFunction:
        """Lf on the grid of f, carrying derivative samples when f does."""

    @abstractmethod
    def norm_bound(self, space: SpaceSpec) -> float:
        """Upper bound of ||L|| on the space."""

    @abstractmethod
    def deviation_bound(self, space: SpaceSpec) -> float:
        """Upper bound of ||I_d - L|| on the space."""

    @property
    def label(self) -> str:
        return self.kind

    def describe(self, space: SpaceSpec) -> dict:
        return {
            "operator": self.label,
            "norm_bound": _json_float(self.norm_bound(space)),
            "deviation_bound": _json_float(self.deviation_bound(space)),
        }

    def __call__(self, f: GridFunction) -> GridFunction:
        return self.apply(f)


def evaluation_constant(space: SpaceSpec, length: float) -> float:
    """E with |g(x)| <= E ||g||_X for every x in an interval of the given length."""
    if space.kind == "lp":
        return math.inf if not math.isinf(space.p) else 1.0
    if space.kind == "sobolev" and not math.isinf(space.p):
        p = space.p
        return 2.0 ** (1.0 - 1.0 / p) * max(length ** (-1.0 / p), length ** (1.0 - 1.0 / p))
    return 1.0


def hat_norm(space: SpaceSpec, length: float) -> float:
    """Norm of the linear hat t/length on an interval of the given length."""
    ell = length
    if space.kind == "bounded":
        return 1.0
    if space.kind == "lp":
        return 1.0 if math.isinf(space.p) else (ell / (space.p + 1.0)) ** (1.0 / space.p)
    if space.kind == "ck":
        return 1.0 if space.k == 0 else max(1.0, 1.0 / ell)
    if space.kind == "sobolev":
        if math.isinf(space.p):
            return 1.0 + 1.0 / ell
        p = space.p
        return (ell / (p + 1.0) + ell ** (1.0 - p)) ** (1.0 / p)
    if space.k == 0:
        return 1.0 + ell ** (-space.sigma)
    return 1.0 + 1.0 / ell


class EndpointLine(LinearBaseOperator):
    """(Lf)(x) = f(x_1) + (f(x_N) - f(x_1)) (x - x_1) / (x_N - x_1)."""

    kind = "endpoint_line"

    def __init__(self, length: float = 1.0):
        if not length > 0:
            raise SpecInvalid("interval length must be positive")
        self.length = float(length)

    def apply(self, f: GridFunction) -> GridFunction:
        f0, f1 = f.samples[0], f.samples[-1]
        slope = (f1 - f0) / (f.hi - f.lo)
        values = f0 + slope * (f.nodes - f.lo)
        stack = []
        if f.order >= 1:
            stack.append(np.full(f.size, slope))
            stack.extend(np.zeros(f.size) for _ in range(f.order - 1))
        return GridFunction(f.domain, values, stack)

    def norm_bound(self, space: SpaceSpec) -> float:
        if space.is_sup_family:
            return 1.0
        return 2.0 * evaluation_constant(space, self.length) * hat_norm(space, self.length)

    def deviation_bound(self, space: SpaceSpec) -> float:
        if space.is_sup_family:
            return 2.0
        return 1.0 + self.norm_bound(space)


class ScaledIdentityBlend(LinearBaseOperator):
    """L = lam I_d + (1 - lam) EndpointLine."""

    kind = "blend"

    def __init__(self, lam: float, length: float = 1.0):
        self.lam = float(lam)
        self.line = EndpointLine(length)

    @property
    def label(self) -> str:
        return f"blend({format(self.lam, 'g')})"

    def apply(self, f: GridFunction) -> GridFunction:
        return self.lam * f + (1.0 - self.lam) * self.line.apply(f)

    def norm_bound(self, space: SpaceSpec) -> float:
        if self.lam == 1.0:
            return 1.0
        return abs(self.lam) + abs(1.0 - self.lam) * self.line.norm_bound(space)

    def deviation_bound(self, space: SpaceSpec) -> float:
        if self.lam == 1.0:
            return 0.0
        return abs(1.0 - self.lam) * self.line.deviation_bound(space)


class TableRow(BaseModel):
    """One term f^(order)(point) * profile of a user table."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    point: float = Field(..., description="Abscissa of the point functional")
    order: int = Field(0, ge=0, description="Derivative order read at the point")
    profile: GridFunction = Field(..., description="Profile function psi")


class UserTable(LinearBaseOperator):
    """Lf = sum_rows f^(r)(x_row) psi_row with user-supplied norm bounds.

    A cubic Hermite table (values and first derivatives at both ends) gives a
    base that matches f to first order at the endpoints.
    """

    kind = "table"

    def __init__(self, rows: List[TableRow], norm_bound: float, deviation_bound: Optional[float] = None):
        if not rows:
            raise SpecInvalid("a table operator needs at least one row")
        if not norm_bound >= 0:
            raise SpecInvalid("table norm bound must be non-negative")
        self.rows = list(rows)
        self._norm_bound = float(norm_bound)
        self._deviation_bound = float(1.0 + norm_bound if deviation_bound is None else deviation_bound)

    def apply(self, f: GridFunction) -> GridFunction:
        total = None
        for row in self.rows:
            if not row.profile.same_grid(f):
                raise SpecInvalid("table profile and function live on different grids")
            weight = float(f.derivative(row.order).eval(row.point))
            term = weight * row.profile
            total = term if total is None else total + term
        return total

    def norm_bound(self, space: SpaceSpec) -> float:
        return self._norm_bound

    def deviation_bound(self, space: SpaceSpec) -> float:
        return self._deviation_bound


def _json_float(value: float):
    return None if math.isinf(value) else float(value)
