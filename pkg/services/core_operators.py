# services/core_operators.py
"""Defect operator, control folding, stabilizer series and power constants.

Every quantity here is computed from its literal definition. Closed forms
(kappa, stability constants, geometric sums) live next to them as a
cross-check layer and are never used to produce a certified bound.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Protocol, Sequence, Tuple, Union

import numpy as np

from models.control_spec import ControlSpec, Mode
from models.results import SeriesResult, StabilityConstant
from models.symmetric_spec import (
    AbsProduct,
    ExactMultiadditive,
    GajdaMulti,
    PowerPerturbed,
    SymmetricSpec,
)
from services.counterexample_service import gajda_multi
from utils.errors import (
    ArityError,
    ConfigurationError,
    CoordinateRangeError,
    DivergentSeriesError,
    ThresholdError,
)
from utils.logger import get_logger

log = get_logger("core")

Point = np.ndarray
PointTuple = Tuple[Point, ...]

# 2^k y beyond this magnitude aborts the run
COORDINATE_LIMIT = 2.0**500


# --------------------------------------------------
# Points and tuples
# --------------------------------------------------
def as_point(x, d: int = 1) -> Point:
    """Coerce a scalar or sequence into a finite float vector of length d."""
    point = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    if point.shape[0] != d:
        raise ArityError(d, point.shape[0], what="point")
    if not np.all(np.isfinite(point)):
        raise ConfigurationError(f"point has non-finite coordinates: {point.tolist()}")
    return point


def as_tuple(y: Sequence, length: int, d: int = 1) -> PointTuple:
    if len(y) != length:
        raise ArityError(length, len(y))
    return tuple(as_point(x, d) for x in y)


def scale_tuple(y: PointTuple, k: int) -> PointTuple:
    """2^k y, exact in binary floating point; k may be negative."""
    scaled = tuple(np.ldexp(p, k) for p in y)
    for p in scaled:
        if p.size and float(np.max(np.abs(p))) > COORDINATE_LIMIT:
            raise CoordinateRangeError(f"2^{k} y leaves the safe range |coordinate| <= 2^500")
    return scaled


def point_norm(x: Point, norm_ord: float = 2.0) -> float:
    if x.shape[0] == 1:
        return abs(float(x[0]))
    return float(np.linalg.norm(x, ord=norm_ord))


def power_factor(norm_value: float, r: float) -> float:
    """||x||^r with ||0||^r = 1 for r <= 0 and 0 for r > 0."""
    if norm_value == 0.0:
        return 1.0 if r <= 0.0 else 0.0
    return norm_value**r


def symmetric_product(values) -> float:
    """Product taken in sorted order, so it does not depend on argument order."""
    return math.prod(sorted(float(v) for v in values))


# --------------------------------------------------
# Symmetric catalog and the defect operator
# --------------------------------------------------
def evaluate_symmetric(spec: SymmetricSpec, y: Sequence) -> float:
    """g(y) for a catalog function."""
    points = as_tuple(y, spec.n, spec.d)
    kind = spec.kind

    if isinstance(kind, ExactMultiadditive):
        return kind.c * symmetric_product(math.fsum(p) for p in points)

    if isinstance(kind, PowerPerturbed):
        exact = kind.c * symmetric_product(math.fsum(p) for p in points)
        bump = symmetric_product(power_factor(point_norm(p), kind.r) for p in points)
        return exact + kind.beta * bump

    if isinstance(kind, AbsProduct):
        return 0.5 * kind.eps * symmetric_product(point_norm(p) for p in points)

    if isinstance(kind, GajdaMulti):
        return gajda_multi([float(p[0]) for p in points], kind.eps)

    raise ConfigurationError(f"unsupported function kind: {kind!r}")


def defect_arguments(z: PointTuple) -> Tuple[PointTuple, PointTuple, PointTuple]:
    """The three n-tuples D_n evaluates: joined last pair, then each of its halves."""
    prefix = z[:-2]
    u, v = z[-2], z[-1]
    return prefix + (u + v,), prefix + (u,), prefix + (v,)


def defect(spec: SymmetricSpec, z: Sequence) -> float:
    """D_n g(z) = g(.., x_n + x_{n+1}) - g(.., x_n) - g(.., x_{n+1})."""
    points = as_tuple(z, spec.n + 1, spec.d)
    joined, left, right = defect_arguments(points)
    return evaluate_symmetric(spec, joined) - evaluate_symmetric(spec, left) - evaluate_symmetric(spec, right)


def defect_with_scale(spec: SymmetricSpec, z: Sequence) -> Tuple[float, float]:
    """D_n g(z) together with the magnitude of the values it cancels."""
    points = as_tuple(z, spec.n + 1, spec.d)
    values = [evaluate_symmetric(spec, t) for t in defect_arguments(points)]
    return values[0] - values[1] - values[2], sum(abs(v) for v in values)


# --------------------------------------------------
# Controls
# --------------------------------------------------
class ControlFunction(Protocol):
    """Anything evaluable as a control on n + 1 points."""

    n: int

    def __call__(self, z: Sequence) -> float: ...

    def tail_ratio(self, mode: Mode, y: Optional[PointTuple] = None) -> Optional[float]: ...


@dataclass(frozen=True)
class PowerControl:
    spec: ControlSpec

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def r(self) -> float:
        return self.spec.r

    @property
    def eps(self) -> float:
        return self.spec.eps

    def factor(self, x: Point) -> float:
        return power_factor(point_norm(x, self.spec.norm_ord), self.r)

    def has_zero(self, y: Sequence) -> bool:
        return any(point_norm(x, self.spec.norm_ord) == 0.0 for x in y)

    def __call__(self, z: Sequence) -> float:
        if len(z) != self.spec.arity:
            raise ArityError(self.spec.arity, len(z), what="control argument")
        prefix = symmetric_product(self.factor(x) for x in z[: self.n - 1])
        return self.eps * prefix * (self.factor(z[-2]) + self.factor(z[-1]))

    def tail_ratio(self, mode: Mode, y: Optional[PointTuple] = None) -> Optional[float]:
        """Bound on the ratio of consecutive stabilizer summands at y (all y when omitted)."""
        n, r = self.n, self.r
        if mode is Mode.PLUS:
            if r >= 1.0:
                return None
            if r >= 0.0:
                return 2.0 ** (n * (r - 1.0))
            # a zero coordinate keeps its factor at 1 when r < 0, so summands decay at 2^{-n} only
            if y is None or self.has_zero(y):
                return 2.0 ** (-n)
            return 2.0 ** (n * (r - 1.0))
        if r <= 1.0:
            return None
        return 2.0 ** (n * (1.0 - r))


@dataclass(frozen=True)
class GenericControl:
    """Wraps a user callable on n + 1 points."""

    fn: Callable[[Sequence], float]
    n: int
    ratio_plus: Optional[float] = None
    ratio_minus: Optional[float] = None

    def __call__(self, z: Sequence) -> float:
        if len(z) != self.n + 1:
            raise ArityError(self.n + 1, len(z), what="control argument")
        value = float(self.fn(z))
        if value < 0.0 or math.isnan(value):
            raise ConfigurationError(f"control returned {value}; controls must be nonnegative")
        return value

    def tail_ratio(self, mode: Mode, y: Optional[PointTuple] = None) -> Optional[float]:
        return self.ratio_plus if mode is Mode.PLUS else self.ratio_minus


ControlLike = Union[ControlSpec, ControlFunction]


def as_control(phi: ControlLike) -> ControlFunction:
    if isinstance(phi, ControlSpec):
        return PowerControl(phi)
    return phi


def control_value(phi: ControlLike, z: Sequence, d: int = 1) -> float:
    control = as_control(phi)
    return control(as_tuple(z, control.n + 1, d))


def fold_control(phi: ControlLike, y: Sequence, d: int = 1) -> float:
    """r_n phi(y), summed term by term.

    term j (weight 2^j) evaluates phi at
    (2x_1, .., 2x_{n-1-j}, x_n, x_{n-1}, .., x_{n-j+1}, x_{n-j}, x_{n-j}).
    """
    control = as_control(phi)
    n = control.n
    points = as_tuple(y, n, d)
    if n == 1:
        return control((points[0], points[0]))

    total = 0.0
    for j in range(n):
        doubled = tuple(2.0 * points[i] for i in range(n - 1 - j))
        reversed_tail = tuple(points[i] for i in range(n - 1, n - 1 - j, -1))
        repeated = (points[n - 1 - j], points[n - 1 - j])
        total += 2.0**j * control(doubled + reversed_tail + repeated)
    return total


# --------------------------------------------------
# Power-control constants
# --------------------------------------------------
def kappa(n: int, r: float) -> float:
    """Coefficient with fold_control(Power(eps, r), y) = eps * kappa * prod ||x_i||^r."""
    if n < 1:
        raise ConfigurationError("n must be a positive integer")
    total = 0.0
    for j in range(n):
        total += 2.0 ** ((n - 1 - j) * r + j + 1)
    return total


def kappa_closed_form(n: int, r: float) -> float:
    """2 (2^{nr} - 2^n) / (2^r - 2), with its limit n 2^n at r = 1."""
    if r == 1.0:
        return n * 2.0**n
    return 2.0 * (2.0 ** (n * r) - 2.0**n) / (2.0**r - 2.0)


def printed_fold_coefficient(n: int, r: float) -> float:
    """The commonly quoted 2^{(n-1)(r-1)+1} (2^{nr} - 2^n) / (2^r - 2)."""
    if r == 1.0:
        return 2.0 * n * 2.0 ** (n - 1)
    return 2.0 ** ((n - 1) * (r - 1) + 1) * (2.0 ** (n * r) - 2.0**n) / (2.0**r - 2.0)


def printed_stability_constant(n: int, r: float) -> float:
    """The commonly quoted 2^{(n-1)(r-1)+1} / |2^r - 2|."""
    if r == 1.0:
        raise ThresholdError()
    return 2.0 ** ((n - 1) * (r - 1) + 1) / abs(2.0**r - 2.0)


def stability_constant(n: int, r: float) -> StabilityConstant:
    """C(n, r) = kappa(n, r) / |2^n - 2^{nr}| next to the printed constant."""
    if r == 1.0:
        raise ThresholdError()
    k = kappa(n, r)
    definitional = k / abs(2.0**n - 2.0 ** (n * r))
    printed = printed_stability_constant(n, r)
    agree = math.isclose(definitional, printed, rel_tol=1e-12)
    if not agree:
        log.debug("⚠️ stability constant mismatch n=%d r=%g: definitional %.17g, printed %.17g", n, r, definitional, printed)
    return StabilityConstant(n=n, r=r, kappa=k, definitional=definitional, printed=printed, agree=agree)


# --------------------------------------------------
# Stabilizer series
# --------------------------------------------------
def select_mode(r: float) -> Mode:
    if r < 1.0:
        return Mode.PLUS
    if r > 1.0:
        return Mode.MINUS
    raise ThresholdError(
        "r = 1: neither rescaling direction converges. Run `hyers-lab threshold` for the counterexamples."
    )


def check_convergence(phi: ControlLike, mode: Mode) -> None:
    """Reject power controls whose stabilizer series diverges in this mode."""
    control = as_control(phi)
    if not isinstance(control, PowerControl):
        return
    r = control.r
    if mode is Mode.PLUS and r >= 1.0:
        raise DivergentSeriesError(
            f"upward convergence condition violated: sum 2^(-n(k+1)) phi(2^k z) diverges for r = {r:g} "
            "(power controls need r < 1 in plus mode)"
        )
    if mode is Mode.MINUS and r <= 1.0:
        raise DivergentSeriesError(
            f"downward convergence condition violated: sum 2^(nk) phi(2^(-k-1) z) diverges for r = {r:g} "
            "(power controls need r > 1 in minus mode)"
        )


def series_term(phi: ControlLike, y: PointTuple, mode: Mode, k: int, d: int = 1) -> float:
    """k-th summand of R_n^+ phi (plus) or R_n^- phi (minus)."""
    control = as_control(phi)
    n = control.n
    if mode is Mode.PLUS:
        return 2.0 ** (-n * (k + 1)) * fold_control(control, scale_tuple(y, k), d)
    return 2.0 ** (n * k) * fold_control(control, scale_tuple(y, -k - 1), d)


def series_closed_form(phi: ControlLike, y: PointTuple, mode: Mode, d: int = 1) -> Optional[float]:
    """r_n phi(y) / (2^n - 2^{nr}) or / (2^{nr} - 2^n); None where it does not apply."""
    control = as_control(phi)
    if not isinstance(control, PowerControl):
        return None
    n, r = control.n, control.r
    if r <= 0.0 and control.has_zero(y):
        return None
    fold = fold_control(control, y, d)
    if mode is Mode.PLUS:
        return fold / (2.0**n - 2.0 ** (n * r))
    return fold / (2.0 ** (n * r) - 2.0**n)


def stabilizer_series(phi: ControlLike, y: Sequence, mode: Mode, k_terms: int = 60, d: int = 1) -> SeriesResult:
    """Partial sum of R_n^{+/-} phi(y) with a geometric tail bound."""
    if k_terms < 1:
        raise ConfigurationError("k_terms must be >= 1")
    control = as_control(phi)
    check_convergence(control, mode)
    points = as_tuple(y, control.n, d)

    value = 0.0
    terms = []
    for k in range(k_terms):
        term = series_term(control, points, mode, k, d)
        terms.append(term)
        value += term
    next_term = series_term(control, points, mode, k_terms, d)

    ratio = control.tail_ratio(mode, points)
    certified = ratio is not None
    if ratio is None:
        ratio = _observed_ratio(terms + [next_term])
        log.warning("⚠️ no a-priori ratio for this control; tail estimated from observed ratio %.6g", ratio)
    if ratio >= 1.0:
        raise DivergentSeriesError(f"stabilizer summands do not decay (observed ratio {ratio:.6g})")

    tail = next_term / (1.0 - ratio)
    return SeriesResult(
        value=value,
        tail_bound=tail,
        terms=k_terms,
        ratio=ratio,
        closed_form=series_closed_form(control, points, mode, d),
        certified=certified,
    )


def _observed_ratio(terms) -> float:
    ratios = [b / a for a, b in zip(terms[-4:-1], terms[-3:]) if a > 0.0]
    if not ratios:
        return 0.0
    return max(ratios)
