"""
Uniform-grid representation of real functions on a compact interval.

A GridFunction stores samples at M = 2^m + 1 equispaced nodes and, when
known exactly, stacks of derivative samples. Off-grid reads interpolate
linearly, which keeps every sup-norm estimate of the fixed-point analysis
valid on the grid.
"""
import csv
import io
import logging
from math import factorial
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from ..exceptions import OrderTooHigh, OutOfDomain, OutOfRange, SpecInvalid
from ..models.partition import AFFINE_TOL, AffineMap, Partition
from ..models.settings import DEFAULT_GRID_LEVEL

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

MAX_FD_ORDER = 4
# Reads this far outside [lo, hi], relative to the length, are clamped instead of rejected.
DOMAIN_TOL = 1e-10


class GridFunction:
    """Immutable samples of a real function on [lo, hi]."""

    __slots__ = ("_lo", "_hi", "_samples", "_derivatives")

    def __init__(
        self,
        domain: Tuple[float, float],
        samples: Sequence[float],
        derivatives: Optional[Sequence[Sequence[float]]] = None,
    ):
        lo, hi = float(domain[0]), float(domain[1])
        if not hi > lo:
            raise SpecInvalid(f"empty grid domain [{lo}, {hi}]")
        values = np.array(samples, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise SpecInvalid("a grid function needs at least two samples")
        if not np.all(np.isfinite(values)):
            raise SpecInvalid("grid samples must be finite")
        values.setflags(write=False)

        stack: List[np.ndarray] = []
        for order, layer in enumerate(derivatives or [], start=1):
            arr = np.array(layer, dtype=float)
            if arr.shape != values.shape:
                raise SpecInvalid(f"derivative {order} has {arr.size} samples, expected {values.size}")
            if not np.all(np.isfinite(arr)):
                raise SpecInvalid(f"derivative {order} samples must be finite")
            arr.setflags(write=False)
            stack.append(arr)

        self._lo = lo
        self._hi = hi
        self._samples = values
        self._derivatives = tuple(stack)

    # ------------------------------------------------------------------ #
    # construction

    @classmethod
    def from_callable(
        cls,
        func: Callable[[np.ndarray], ArrayLike],
        domain: Tuple[float, float] = (0.0, 1.0),
        level: int = DEFAULT_GRID_LEVEL,
        derivatives: Optional[Sequence[Callable[[np.ndarray], ArrayLike]]] = None,
    ) -> "GridFunction":
        """Sample func (and optional exact derivatives) on a level-m grid."""
        nodes = grid_nodes(domain, level)
        values = _broadcast(func(nodes), nodes)
        stack = [_broadcast(d(nodes), nodes) for d in (derivatives or [])]
        return cls(domain, values, stack)

    @classmethod
    def from_samples(
        cls,
        samples: Sequence[float],
        domain: Tuple[float, float] = (0.0, 1.0),
        level: int = DEFAULT_GRID_LEVEL,
    ) -> "GridFunction":
        """Uniform samples of any length, resampled onto the level-m grid."""
        values = np.asarray(samples, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise SpecInvalid("samples must be a list of at least two numbers")
        nodes = grid_nodes(domain, level)
        if values.size == nodes.size:
            return cls(domain, values)
        source = np.linspace(domain[0], domain[1], values.size)
        return cls(domain, np.interp(nodes, source, values))

    @classmethod
    def constant(cls, value: float, domain: Tuple[float, float] = (0.0, 1.0), level: int = DEFAULT_GRID_LEVEL) -> "GridFunction":
        return cls(domain, np.full(2 ** level + 1, float(value)))

    def with_samples(self, values: np.ndarray) -> "GridFunction":
        """Same grid, new samples, no derivative stack."""
        return GridFunction(self.domain, values)

    def with_derivatives(self, derivatives: Sequence[Sequence[float]]) -> "GridFunction":
        return GridFunction(self.domain, self._samples, derivatives)

    def without_derivatives(self) -> "GridFunction":
        return GridFunction(self.domain, self._samples)

    # ------------------------------------------------------------------ #
    # grid properties

    @property
    def domain(self) -> Tuple[float, float]:
        return self._lo, self._hi

    @property
    def lo(self) -> float:
        return self._lo

    @property
    def hi(self) -> float:
        return self._hi

    @property
    def samples(self) -> np.ndarray:
        return self._samples

    @property
    def derivatives(self) -> Tuple[np.ndarray, ...]:
        return self._derivatives

    @property
    def order(self) -> int:
        """Highest derivative carried exactly."""
        return len(self._derivatives)

    @property
    def size(self) -> int:
        return self._samples.size

    @property
    def h(self) -> float:
        return (self._hi - self._lo) / (self.size - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self._lo, self._hi, self.size)

    def same_grid(self, other: "GridFunction") -> bool:
        return self.size == other.size and self.domain == other.domain

    def _require_same_grid(self, other: "GridFunction") -> None:
        if not self.same_grid(other):
            raise SpecInvalid(
                f"grid mismatch: {self.size} nodes on {self.domain} vs {other.size} nodes on {other.domain}"
            )

    # ------------------------------------------------------------------ #
    # evaluation

    def eval(self, x: ArrayLike) -> ArrayLike:
        """Piecewise-linear interpolation, exact at nodes."""
        arr = np.asarray(x, dtype=float)
        slack = DOMAIN_TOL * (self._hi - self._lo)
        if np.any(arr < self._lo - slack) or np.any(arr > self._hi + slack):
            raise OutOfDomain(f"abscissa outside [{self._lo}, {self._hi}]")
        out = np.interp(np.clip(arr, self._lo, self._hi), self.nodes, self._samples)
        return float(out) if out.ndim == 0 else out

    __call__ = eval

    def derivative(self, order: int) -> "GridFunction":
        """Order-th derivative from the exact stack when present, else finite differences."""
        if order == 0:
            return self
        if order <= self.order:
            return GridFunction(self.domain, self._derivatives[order - 1], self._derivatives[order:])
        return finite_difference(self, order)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self._samples)))

    def running_integral(self, rule: str = "trapezoid") -> "GridFunction":
        """x -> integral of the function from lo to x.

        rule="left" sums cell values from the left, which is the exact running
        integral of data that is constant on each cell [x_j, x_{j+1}).
        """
        if rule == "left":
            values = np.concatenate(([0.0], np.cumsum(self._samples[:-1]) * self.h))
        elif rule == "trapezoid":
            values = cumulative_trapezoid(self._samples, dx=self.h, initial=0.0)
        else:
            raise SpecInvalid(f"unknown integration rule {rule!r}")
        return GridFunction(self.domain, values, [self._samples])

    # ------------------------------------------------------------------ #
    # arithmetic

    def _combine(self, other: "GridFunction", sign: float) -> "GridFunction":
        self._require_same_grid(other)
        depth = min(self.order, other.order)
        stack = [self._derivatives[r] + sign * other._derivatives[r] for r in range(depth)]
        return GridFunction(self.domain, self._samples + sign * other._samples, stack)

    def __add__(self, other: Union["GridFunction", float]) -> "GridFunction":
        if isinstance(other, GridFunction):
            return self._combine(other, 1.0)
        return GridFunction(self.domain, self._samples + float(other), self._derivatives)

    __radd__ = __add__

    def __sub__(self, other: Union["GridFunction", float]) -> "GridFunction":
        if isinstance(other, GridFunction):
            return self._combine(other, -1.0)
        return GridFunction(self.domain, self._samples - float(other), self._derivatives)

    def __mul__(self, scalar: float) -> "GridFunction":
        if isinstance(scalar, GridFunction):
            return NotImplemented
        c = float(scalar)
        return GridFunction(self.domain, c * self._samples, [c * d for d in self._derivatives])

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "GridFunction":
        return self * (1.0 / float(scalar))

    def __neg__(self) -> "GridFunction":
        return self * -1.0

    def __repr__(self) -> str:
        return f"GridFunction(domain={self.domain}, size={self.size}, order={self.order})"

    # ------------------------------------------------------------------ #
    # export

    def to_csv(self, order: Optional[int] = None) -> str:
        """CSV text with header x,value[,d1,...,dk] at 17 significant digits."""
        depth = self.order if order is None else order
        columns: Dict[str, np.ndarray] = {"value": self._samples}
        for r in range(1, depth + 1):
            columns[f"d{r}"] = self.derivative(r).samples
        return columns_to_csv(self.nodes, columns)

    def write_csv(self, path: Union[str, Path], order: Optional[int] = None) -> Path:
        target = Path(path)
        target.write_text(self.to_csv(order), encoding="utf-8")
        logger.info("wrote %s (%d rows)", target, self.size)
        return target


def grid_nodes(domain: Tuple[float, float], level: int = DEFAULT_GRID_LEVEL) -> np.ndarray:
    """Nodes of the level-m grid on domain."""
    if level < 1:
        raise SpecInvalid(f"grid level must be at least 1, got {level}")
    return np.linspace(float(domain[0]), float(domain[1]), 2 ** level + 1)


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def columns_to_csv(x: np.ndarray, columns: Dict[str, np.ndarray], x_name: str = "x") -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([x_name, *columns.keys()])
    data = [np.asarray(col) for col in columns.values()]
    for j, xj in enumerate(x):
        writer.writerow([format_float(xj), *(format_float(col[j]) for col in data)])
    return buffer.getvalue()


def _broadcast(value: ArrayLike, nodes: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(value, dtype=float), nodes.shape).copy()


def snap_knots(partition: Partition, gf: GridFunction) -> Tuple[np.ndarray, float]:
    """Nearest node index of each knot and the largest knot-to-node distance."""
    knots = np.asarray(partition.knots)
    idx = np.clip(np.rint((knots - gf.lo) / gf.h).astype(int), 0, gf.size - 1)
    error = float(np.max(np.abs(gf.nodes[idx] - knots)))
    return idx, error


def compose_affine_inverse(gf: GridFunction, amap: AffineMap, target_nodes: ArrayLike) -> np.ndarray:
    """gf(L^{-1}(x)) at abscissae x inside the image of the map."""
    x = np.atleast_1d(np.asarray(target_nodes, dtype=float))
    lo, hi = amap.image
    slack = AFFINE_TOL * (amap.source[1] - amap.source[0])
    if np.any(x < lo - slack) or np.any(x > hi + slack):
        raise OutOfRange(f"abscissa outside the image interval [{lo}, {hi}]")
    u = np.clip(amap.inverse(x), amap.source[0], amap.source[1])
    return np.atleast_1d(gf.eval(u))


def quadrature_p_power(gf: GridFunction, p: float) -> float:
    """Composite-trapezoid value of the integral of |g|^p (no root taken)."""
    if not p > 0:
        raise SpecInvalid(f"quadrature exponent must be positive, got {p}")
    return float(trapezoid(np.abs(gf.samples) ** p, dx=gf.h))


def stencil_weights(offsets: Sequence[int], order: int) -> np.ndarray:
    """Finite-difference weights w with sum_k w_k f(x + s_k h) ~ h^order f^(order)(x)."""
    s = np.asarray(offsets, dtype=float)
    powers = np.vander(s, len(s), increasing=True).T
    rhs = np.zeros(len(s))
    rhs[order] = factorial(order)
    return np.linalg.solve(powers, rhs)


def finite_difference(gf: GridFunction, order: int, scheme: str = "central") -> GridFunction:
    """order-th derivative samples by finite differences.

    scheme="central" uses second-order central stencils at interior nodes and
    second-order one-sided stencils at the boundary, one stencil per order.
    scheme="forward" applies the first forward difference order times, the
    last node repeating its left neighbour.
    """
    if order < 1:
        raise SpecInvalid(f"finite-difference order must be at least 1, got {order}")
    if order > MAX_FD_ORDER or gf.size < 2 * order + 1 or gf.size < order + 2:
        raise OrderTooHigh(f"order {order} needs order <= {MAX_FD_ORDER} and at least {2 * order + 1} nodes")

    values = gf.samples
    if scheme == "forward":
        out = values
        for _ in range(order):
            diff = np.diff(out) / gf.h
            out = np.append(diff, diff[-1])
        return GridFunction(gf.domain, out)
    if scheme != "central":
        raise SpecInvalid(f"unknown finite-difference scheme {scheme!r}")

    m = values.size
    half = (order + 1) // 2
    scale = gf.h ** order
    out = np.empty(m)

    central = np.arange(-half, half + 1)
    weights = stencil_weights(central, order)
    inner = slice(half, m - half)
    acc = np.zeros(m - 2 * half)
    for w, s in zip(weights, central):
        acc += w * values[half + s: m - half + s]
    out[inner] = acc / scale

    width = order + 2
    for j in list(range(half)) + list(range(m - half, m)):
        start = 0 if j < half else m - width
        offsets = np.arange(start, start + width) - j
        w = stencil_weights(offsets, order)
        out[j] = float(np.dot(w, values[start:start + width])) / scale
    return GridFunction(gf.domain, out)
