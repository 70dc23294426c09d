# models/control_spec.py

import math
from enum import Enum
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, field_validator


class Mode(str, Enum):
    """Direction of the dyadic rescaling."""

    PLUS = "plus"    # a(y) = lim 2^{-nk} g(2^k y), needs r < 1
    MINUS = "minus"  # a(y) = lim 2^{nk} g(2^{-k} y), needs r > 1


class Power(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["power"] = "power"
    eps: PositiveFloat = 1.0
    r: float = 0.0

    @field_validator("r")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("control exponent r must be finite.")
        return value


class ControlSpec(BaseModel):
    """Control phi on n+1 points: eps ||x_1||^r ... ||x_{n-1}||^r (||x_n||^r + ||x_{n+1}||^r).

    `n` is the arity of the controlled g, so phi itself takes n + 1 points.
    Zero convention: ||0||^r = 1 when r <= 0.
    """

    model_config = ConfigDict(frozen=True)

    n: PositiveInt
    kind: Power = Power()
    norm_ord: float = Field(2.0, ge=1.0)

    @property
    def arity(self) -> int:
        return self.n + 1

    @property
    def eps(self) -> float:
        return self.kind.eps

    @property
    def r(self) -> float:
        return self.kind.r


class DirectMethodConfig(BaseModel):
    """Knobs of the direct-method iteration."""

    model_config = ConfigDict(frozen=True)

    c: PositiveFloat
    k_max: PositiveInt = 60
    tol: PositiveFloat = 1e-12
    mode: Mode = Mode.PLUS
    # a-priori bound on c^{-k-2} alpha_{k+1} / (c^{-k-1} alpha_k)
    tail_ratio: Optional[float] = Field(None, gt=0.0, lt=1.0)
