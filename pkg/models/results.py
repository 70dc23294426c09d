# models/results.py

from typing import Callable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from models.control_spec import Mode


class SeriesResult(BaseModel):
    """Partial sum of a stabilizer series with its tail certificate."""

    value: float
    tail_bound: float = Field(ge=0.0)
    terms: int
    ratio: Optional[float] = None
    closed_form: Optional[float] = None
    certified: bool = True

    @property
    def total(self) -> float:
        """Upper bound for the full series."""
        return self.value + self.tail_bound


class DirectMethodResult(BaseModel):
    limit: float
    beta: float = Field(ge=0.0)
    iterations: int
    certified: bool
    tail_bound: float = Field(ge=0.0)
    first_term: float
    trace: List[Tuple[int, float]] = []


class ApproximationResult(BaseModel):
    """a(y) estimate with its certified bound |g(y) - a(y)| <= bound."""

    value: float
    bound: float = Field(ge=0.0)
    iterations_used: int
    trace: List[Tuple[int, float]] = []
    beta: float = Field(0.0, ge=0.0)
    # remaining-tail bound on |value - a(y)|
    tail_bound: float = Field(0.0, ge=0.0)
    certified: bool = True
    mode: Mode = Mode.PLUS
    start_offset: int = 0


class SlackEntry(BaseModel):
    point: List[float]
    g: float
    a: float
    bound: float
    error: float
    slack: float
    passed: bool


class PointwiseReport(BaseModel):
    entries: List[SlackEntry] = []
    tolerance: float = 1e-9

    @property
    def violations(self) -> List[SlackEntry]:
        return [e for e in self.entries if not e.passed]

    @property
    def worst_slack(self) -> Optional[float]:
        if not self.entries:
            return None
        return min(e.slack for e in self.entries)


class StabilityConstant(BaseModel):
    """Per-eps coefficient of the certified bound next to the printed one."""

    n: int
    r: float
    kappa: float
    definitional: float
    printed: float
    agree: bool


class SampleCheck(BaseModel):
    """Outcome of checking an inequality on a finite sample."""

    name: str
    checked: int
    violations: int
    worst_ratio: float = 0.0
    worst_point: Optional[List[float]] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0


class FamilyVerdict(BaseModel):
    """Does a_alpha = alpha x_1...x_n stay within delta |x_1...x_n| of (eps/2)|x_1...x_n|?"""

    alpha: float
    valid_nonnegative: bool
    sampled_nonnegative: bool
    valid_line: bool
    sampled_line: bool

    @property
    def valid(self) -> bool:
        return self.valid_nonnegative

    @property
    def consistent(self) -> bool:
        return self.valid_nonnegative == self.sampled_nonnegative and self.valid_line == self.sampled_line


class AdditiveCandidate(BaseModel):
    """An additive m: R -> R known through m(1) and an evaluation handle."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    c: float
    evaluate: Callable[[float], float]
    flagged: bool = False
    note: str = ""

    def __call__(self, x: float) -> float:
        return self.evaluate(x)


class WitnessReport(BaseModel):
    x_star: float
    lhs: float
    rhs: float
    ratio: float
    N: int
    method: str = "analytic"

    @property
    def valid(self) -> bool:
        return self.ratio > 1.0
