# models/scenario_config.py

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError, model_validator

from models.control_spec import ControlSpec, Power
from models.symmetric_spec import (
    AbsProduct,
    ExactMultiadditive,
    FunctionKind,
    GajdaMulti,
    PowerPerturbed,
    SymmetricSpec,
)
from utils.errors import ConfigurationError
from utils.sampling import DEFAULT_SEED


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FunctionSection(_Section):
    kind: FunctionKind = FunctionKind.EXACT
    c: float = 1.0
    beta: float = 0.1
    r: Optional[float] = None      # perturbation exponent, defaults to control.r
    eps: Optional[PositiveFloat] = None  # abs-product / gajda-multi, defaults to control.eps


class ControlSection(_Section):
    eps: PositiveFloat = 1.0
    r: float = 0.5
    norm_ord: float = Field(2.0, ge=1.0)


class GridSection(_Section):
    min: float = -4.0
    max: float = 4.0
    count: PositiveInt = 9

    @model_validator(mode="after")
    def _ordered(self):
        if self.min > self.max:
            raise ValueError(f"grid min {self.min} is larger than max {self.max}")
        return self


class SamplingSection(_Section):
    samples: PositiveInt = 1000
    seed: int = Field(DEFAULT_SEED, ge=0)
    box: PositiveFloat = 10.0
    hypothesis_samples: PositiveInt = 512
    additivity_samples: PositiveInt = 16


class IterationSection(_Section):
    k_max: PositiveInt = 60
    tol: PositiveFloat = 1e-12
    offsets: List[int] = [0]


class OutputSection(_Section):
    path: Optional[Path] = None
    format: Literal["csv", "json"] = "csv"


class ThresholdSection(_Section):
    delta: PositiveFloat = 0.25
    deltas: List[PositiveFloat] = [0.25, 1.0, 4.0, 16.0]
    alphas: Optional[List[float]] = None
    alpha_count: PositiveInt = 9
    candidates: List[float] = [0.0, 1.0, -1.0, 10.0, -10.0]
    fit_candidate: bool = True


class ConstantsSection(_Section):
    n_values: List[PositiveInt] = [1, 2, 3, 4, 5]
    r_values: List[float] = [-1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.5, 2.0, 3.0]


class ScenarioConfig(_Section):
    """One experiment: file values first, CLI flags on top."""

    n: PositiveInt = 2
    d: PositiveInt = 1
    workers: PositiveInt = 1
    function: FunctionSection = FunctionSection()
    control: ControlSection = ControlSection()
    grid: GridSection = GridSection()
    sampling: SamplingSection = SamplingSection()
    iteration: IterationSection = IterationSection()
    output: OutputSection = OutputSection()
    threshold: ThresholdSection = ThresholdSection()
    constants: ConstantsSection = ConstantsSection()

    # --------------------------------------------------
    # Loading
    # --------------------------------------------------
    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioConfig":
        try:
            return cls.model_validate(data or {})
        except ValidationError as e:
            raise ConfigurationError(f"invalid scenario config: {e}") from e

    @classmethod
    def from_yaml(cls, text: str) -> "ScenarioConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"config is not valid YAML: {e}") from e
        if data is not None and not isinstance(data, dict):
            raise ConfigurationError("config file must hold a mapping at the top level")
        return cls.from_dict(data or {})

    @classmethod
    def load(cls, path: Optional[Path], overrides: Optional[Dict[str, Any]] = None) -> "ScenarioConfig":
        """Read `path` (if any) and apply dotted-key overrides, e.g. {"control.r": 2.0}."""
        data: Dict[str, Any] = {}
        if path is not None:
            if not Path(path).is_file():
                raise ConfigurationError(f"config file not found: {path}")
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
            if not isinstance(data, dict):
                raise ConfigurationError("config file must hold a mapping at the top level")
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            _set_dotted(data, key, value)
        return cls.from_dict(data)

    def to_canonical_yaml(self) -> str:
        """Stable text of everything that shapes report rows; `workers` only partitions the work."""
        return yaml.safe_dump(self.model_dump(mode="json", exclude={"workers"}), sort_keys=True, default_flow_style=False)

    # --------------------------------------------------
    # Domain objects
    # --------------------------------------------------
    @property
    def function_eps(self) -> float:
        return self.function.eps if self.function.eps is not None else self.control.eps

    def symmetric_spec(self) -> SymmetricSpec:
        f = self.function
        if f.kind is FunctionKind.EXACT:
            kind = ExactMultiadditive(c=f.c)
        elif f.kind is FunctionKind.POWER_PERTURBED:
            kind = PowerPerturbed(c=f.c, beta=f.beta, r=f.r if f.r is not None else self.control.r)
        elif f.kind is FunctionKind.ABS_PRODUCT:
            kind = AbsProduct(eps=self.function_eps)
        elif f.kind is FunctionKind.GAJDA_MULTI:
            kind = GajdaMulti(eps=self.function_eps)
        else:
            raise ConfigurationError(f"function kind '{f.kind.value}' is reserved and cannot be evaluated")
        try:
            return SymmetricSpec(n=self.n, d=self.d, kind=kind)
        except ValidationError as e:
            raise ConfigurationError(str(e)) from e

    def control_spec(self) -> ControlSpec:
        return ControlSpec(n=self.n, kind=Power(eps=self.control.eps, r=self.control.r), norm_ord=self.control.norm_ord)


def _set_dotted(data: Dict[str, Any], key: str, value: Any) -> None:
    node = data
    *parents, leaf = key.split(".")
    for part in parents:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[leaf] = value
