# models/symmetric_spec.py

from enum import Enum
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator


class FunctionKind(str, Enum):
    """Names of the symmetric-function catalog as they appear in configs."""

    EXACT = "exact"
    POWER_PERTURBED = "power-perturbed"
    ABS_PRODUCT = "abs-product"
    GAJDA_MULTI = "gajda-multi"
    CUSTOM_TABULATED = "custom-tabulated"


class ExactMultiadditive(BaseModel):
    """c * l(x_1) ... l(x_n), l(x) = sum of coordinates."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["exact"] = "exact"
    c: float = 1.0


class PowerPerturbed(BaseModel):
    """Exact product plus beta * ||x_1||^r ... ||x_n||^r."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["power-perturbed"] = "power-perturbed"
    c: float = 1.0
    beta: float = 0.1
    r: float = Field(0.5, gt=0.0)


class AbsProduct(BaseModel):
    """(eps/2) ||x_1|| ... ||x_n||; admits a whole interval of approximants at r = 1."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["abs-product"] = "abs-product"
    eps: PositiveFloat = 1.0


class GajdaMulti(BaseModel):
    """sum_i f_G(x_i) prod_{j != i} x_j; admits no approximant at r = 1."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["gajda-multi"] = "gajda-multi"
    eps: PositiveFloat = 1.0


CatalogKind = Annotated[
    Union[ExactMultiadditive, PowerPerturbed, AbsProduct, GajdaMulti],
    Field(discriminator="kind"),
]


class SymmetricSpec(BaseModel):
    """Declarative description of a symmetric g: (R^d)^n -> R."""

    model_config = ConfigDict(frozen=True)

    n: PositiveInt
    d: PositiveInt = 1
    kind: CatalogKind = ExactMultiadditive()

    @model_validator(mode="after")
    def _check_gajda_setting(self):
        if isinstance(self.kind, GajdaMulti) and (self.d != 1 or self.n < 2):
            raise ValueError("gajda-multi is defined for d = 1 and n >= 2 only (use gajda_exact for n = 1).")
        return self

    @property
    def name(self) -> str:
        return self.kind.kind
