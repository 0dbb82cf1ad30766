"""
Function spaces in which contraction and operator bounds are measured.
"""
import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..exceptions import SpecInvalid

SpaceKind = Literal["bounded", "lp", "ck", "sobolev", "hoelder"]

MAX_SPACE_ORDER = 4


class SpaceSpec(BaseModel):
    """Bounded | Lp(p) | Ck(k) | Sobolev(k, p) | Hoelder(k, sigma)."""
    model_config = ConfigDict(frozen=True)

    kind: SpaceKind = Field(..., description="Space family")
    p: Optional[float] = Field(None, description="Integrability exponent, inf allowed")
    k: int = Field(0, ge=0, description="Differentiability order")
    sigma: Optional[float] = Field(None, description="Hoelder exponent in (0, 1]")

    @model_validator(mode="after")
    def check_parameters(self) -> "SpaceSpec":
        """Parameter ranges per family."""
        if self.kind == "lp":
            if self.p is None or not self.p > 0:
                raise ValueError("Lp needs 0 < p <= inf")
            if self.k != 0:
                raise ValueError("Lp carries no derivative order")
        elif self.kind == "sobolev":
            if self.k < 1:
                raise ValueError("Sobolev needs k >= 1")
            if self.p is None or not self.p >= 1:
                raise ValueError("Sobolev needs 1 <= p <= inf")
        elif self.kind == "hoelder":
            if self.sigma is None or not 0 < self.sigma <= 1:
                raise ValueError("Hoelder needs 0 < sigma <= 1")
        elif self.kind == "bounded" and self.k != 0:
            raise ValueError("the bounded space carries no derivative order")
        if self.kind in ("bounded", "ck") and self.p is not None:
            raise ValueError(f"{self.kind} takes no exponent p")
        if self.kind != "hoelder" and self.sigma is not None:
            raise ValueError("sigma only applies to Hoelder spaces")
        return self

    # ------------------------------------------------------------------ #
    # constructors

    @classmethod
    def bounded(cls) -> "SpaceSpec":
        return cls(kind="bounded")

    @classmethod
    def lp(cls, p: float) -> "SpaceSpec":
        return _build(kind="lp", p=p)

    @classmethod
    def ck(cls, k: int) -> "SpaceSpec":
        return _build(kind="ck", k=k)

    @classmethod
    def sobolev(cls, k: int, p: float) -> "SpaceSpec":
        return _build(kind="sobolev", k=k, p=p)

    @classmethod
    def hoelder(cls, k: int, sigma: float) -> "SpaceSpec":
        return _build(kind="hoelder", k=k, sigma=sigma)

    @classmethod
    def parse(cls, text: str) -> "SpaceSpec":
        """Parse 'bounded', 'lp:2', 'lp:inf', 'ck:1', 'sobolev:1,2' or 'hoelder:1,0.5'."""
        name, _, args = text.strip().lower().partition(":")
        parts = [a.strip() for a in args.split(",")] if args else []
        try:
            if name == "bounded" and not parts:
                return cls.bounded()
            if name == "lp" and len(parts) == 1:
                return cls.lp(_number(parts[0]))
            if name == "ck" and len(parts) == 1:
                return cls.ck(int(parts[0]))
            if name == "sobolev" and len(parts) == 2:
                return cls.sobolev(int(parts[0]), _number(parts[1]))
            if name == "hoelder" and len(parts) == 2:
                return cls.hoelder(int(parts[0]), _number(parts[1]))
        except ValueError as e:
            raise SpecInvalid(f"invalid space {text!r}: {e}") from e
        raise SpecInvalid(f"invalid space {text!r}")

    # ------------------------------------------------------------------ #
    # derived

    @property
    def requires_derivatives(self) -> int:
        """Derivative order the space's norm reads."""
        return self.k if self.kind in ("ck", "sobolev", "hoelder") else 0

    @property
    def is_sup_family(self) -> bool:
        """Norm equal to the sup norm (B(I), L-infinity, C^0)."""
        if self.kind == "bounded":
            return True
        if self.kind == "lp":
            return math.isinf(self.p)
        return self.kind == "ck" and self.k == 0

    @property
    def is_quasi_norm(self) -> bool:
        return self.kind == "lp" and self.p < 1

    @property
    def requires_constant_scaling(self) -> bool:
        return self.kind in ("sobolev", "hoelder")

    @property
    def label(self) -> str:
        if self.kind == "bounded":
            return "Bounded"
        if self.kind == "lp":
            return f"Lp({_fmt(self.p)})"
        if self.kind == "ck":
            return f"Ck({self.k})"
        if self.kind == "sobolev":
            return f"Sobolev({self.k},{_fmt(self.p)})"
        return f"Hoelder({self.k},{_fmt(self.sigma)})"

    def to_text(self) -> str:
        """Inverse of parse."""
        if self.kind == "bounded":
            return "bounded"
        if self.kind == "lp":
            return f"lp:{_fmt(self.p)}"
        if self.kind == "ck":
            return f"ck:{self.k}"
        if self.kind == "sobolev":
            return f"sobolev:{self.k},{_fmt(self.p)}"
        return f"hoelder:{self.k},{_fmt(self.sigma)}"


def _build(**kwargs) -> SpaceSpec:
    try:
        return SpaceSpec(**kwargs)
    except ValidationError as e:
        raise SpecInvalid(f"invalid space {kwargs}: {e.errors()[0]['msg']}") from e


def _number(text: str) -> float:
    if text in ("inf", "infinity", "oo"):
        return math.inf
    return float(text)


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return format(value, "g")
