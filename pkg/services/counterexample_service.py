# services/counterexample_service.py
"""Counterexamples at the stability threshold r = 1.

f_G(x) = sum_k 2^{-k} zeta(2^k x) is bounded, has Cauchy defect at most
eps (|x| + |y|), yet no additive m stays within delta |x| of it. The
n-variable versions lift that to symmetric n-additive maps.
"""

import math
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from models.results import AdditiveCandidate, FamilyVerdict, SampleCheck, WitnessReport
from utils.errors import ConfigurationError, WitnessNotFoundError
from utils.logger import get_logger

log = get_logger("counterexamples")

ZetaFn = Callable[[float, float], float]

# analytic witnesses deeper than this are certified in exact dyadic arithmetic
FLOAT_WITNESS_DEPTH = 1000
SCAN_DEPTH = 200


# --------------------------------------------------
# zeta and f_G
# --------------------------------------------------
def zeta(x: float, eps: float) -> float:
    """eps/6 on [1, inf), (eps/6) x on (-1, 1), -eps/6 on (-inf, -1]."""
    if x >= 1.0:
        return eps / 6.0
    if x <= -1.0:
        return -eps / 6.0
    return eps / 6.0 * x


def zeta_literal_branches(x: float, eps: float) -> float:
    """Overlapping reading with the last branch taken on (-inf, 1].

    Only used to inject a known fault into the self-test.
    """
    if x >= 1.0:
        return eps / 6.0
    if x <= 1.0:
        return -eps / 6.0
    return eps / 6.0 * x


def dyadic_depth(x: float) -> int:
    """Least K >= 0 with 2^K |x| >= 1 (x != 0), read off the binary exponent."""
    ax = abs(x)
    if ax >= 1.0:
        return 0
    _, exponent = math.frexp(ax)
    return 1 - exponent


def gajda_exact(x: float, eps: float) -> float:
    """f_G(x) = (eps/6) (K x + sign(x) 2^{1-K}) with K = dyadic_depth(x)."""
    if x == 0.0:
        return 0.0
    K = dyadic_depth(x)
    return eps / 6.0 * (K * x + math.copysign(math.ldexp(1.0, 1 - K), x))


def gajda_exact_fraction(x: Fraction, eps: Fraction) -> Fraction:
    """Same closed form in exact rational arithmetic (x must be nonzero)."""
    if x == 0:
        return Fraction(0)
    ax = abs(x)
    p, q = ax.numerator, ax.denominator
    K = max(0, q.bit_length() - p.bit_length())
    if (p << K) < q:
        K += 1
    sign = 1 if x > 0 else -1
    return eps / 6 * (K * x + sign * Fraction(2) / 2**K)


def gajda_series(x: float, eps: float, k_terms: int, zeta_fn: ZetaFn = zeta) -> tuple[float, float]:
    """Truncated series and its tail bound (eps/6) 2^{1-k_terms}."""
    if k_terms < 1:
        raise ConfigurationError("k_terms must be >= 1")
    value = 0.0
    for k in range(k_terms):
        value += math.ldexp(zeta_fn(math.ldexp(x, k), eps), -k)
    return value, eps / 6.0 * math.ldexp(1.0, 1 - k_terms)


def cauchy_defect(x: float, y: float, eps: float) -> float:
    """f_G(x + y) - f_G(x) - f_G(y)."""
    return gajda_exact(x + y, eps) - gajda_exact(x, eps) - gajda_exact(y, eps)


def gajda_multi(y: Sequence[float], eps: float) -> float:
    """sum_i f_G(x_i) prod_{j != i} x_j, summed exactly rounded so order does not matter."""
    n = len(y)
    if n < 2:
        raise ConfigurationError("gajda_multi needs n >= 2; for n = 1 use gajda_exact directly")
    xs = [float(v) for v in y]
    terms = []
    for i, xi in enumerate(xs):
        others = sorted(xs[:i] + xs[i + 1 :])
        terms.append(gajda_exact(xi, eps) * math.prod(others))
    return math.fsum(terms)


# --------------------------------------------------
# Samplers for the defect bounds
# --------------------------------------------------
def lemma_bound_sample(eps: float, pairs: np.ndarray, tolerance: float = 1e-12) -> SampleCheck:
    """|f_G(x+y) - f_G(x) - f_G(y)| <= eps (|x| + |y|) on the given pairs."""
    violations, worst, worst_point = 0, 0.0, None
    for x, y in pairs:
        x, y = float(x), float(y)
        lhs = abs(cauchy_defect(x, y, eps))
        rhs = eps * (abs(x) + abs(y))
        if lhs > rhs + tolerance * max(1.0, rhs):
            violations += 1
        ratio = lhs / rhs if rhs > 0.0 else (math.inf if lhs > 0.0 else 0.0)
        if ratio > worst:
            worst, worst_point = ratio, [x, y]
    return SampleCheck(name="cauchy-defect-bound", checked=len(pairs), violations=violations, worst_ratio=worst, worst_point=worst_point)


def multi_defect_sample(n: int, eps: float, zs: np.ndarray, tolerance: float = 1e-12) -> SampleCheck:
    """|D_n g(z)| <= eps |x_1|...|x_{n-1}| (|x_n| + |x_{n+1}|) for g = gajda_multi."""
    violations, worst, worst_point = 0, 0.0, None
    for z in zs:
        z = [float(v) for v in z]
        prefix = z[: n - 1]
        joined = gajda_multi(prefix + [z[-2] + z[-1]], eps)
        left = gajda_multi(prefix + [z[-2]], eps)
        right = gajda_multi(prefix + [z[-1]], eps)
        lhs = abs(joined - left - right)
        rhs = eps * math.prod(abs(v) for v in prefix) * (abs(z[-2]) + abs(z[-1]))
        scale = abs(joined) + abs(left) + abs(right)
        if lhs > rhs + tolerance * max(1.0, scale):
            violations += 1
        ratio = lhs / rhs if rhs > 0.0 else 0.0
        if ratio > worst:
            worst, worst_point = ratio, z
    return SampleCheck(name="multi-defect-bound", checked=len(zs), violations=violations, worst_ratio=worst, worst_point=worst_point)


# --------------------------------------------------
# First counterexample: many approximants
# --------------------------------------------------
def _family_gap(n: int, eps: float, delta: float, alpha: float, points: np.ndarray, tolerance: float) -> bool:
    """True when |(eps/2) prod|x| - alpha prod x| <= delta prod|x| on every sample."""
    for x in points:
        product = math.prod(float(v) for v in x)
        abs_product = abs(product)
        gap = abs(0.5 * eps * abs_product - alpha * product)
        if gap > delta * abs_product + tolerance * max(1.0, abs_product):
            return False
    return True


def _orthant_corners(n: int, signed: bool) -> np.ndarray:
    """One point per sign pattern with an odd/even number of negatives."""
    corners = [np.ones(n)]
    if signed:
        negative = np.ones(n)
        negative[0] = -1.0
        corners.append(negative)
    return np.array(corners)


def nonuniqueness_family(
    n: int,
    eps: float,
    delta: float,
    alpha: float,
    samples: Optional[np.ndarray] = None,
    tolerance: float = 1e-12,
) -> FamilyVerdict:
    """Decide whether a(y) = alpha x_1...x_n is a delta-approximant of (eps/2)|x_1...x_n|.

    On the nonnegative semigroup [0, inf)^n the gap is |eps/2 - alpha| prod|x_i|, so
    every alpha in [eps/2 - delta, eps/2 + delta] works. On the whole line the
    negative-product orthant adds |eps/2 + alpha| prod|x_i|.
    `samples` are points of [0, R]^n; the whole-line check also uses their
    sign-flipped copies.
    """
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    valid_nonnegative = abs(0.5 * eps - alpha) <= delta
    valid_line = max(abs(0.5 * eps - alpha), abs(0.5 * eps + alpha)) <= delta

    base = _orthant_corners(n, signed=False)
    if samples is not None and len(samples):
        base = np.vstack([base, np.abs(np.asarray(samples, dtype=float).reshape(-1, n))])
    signed = base.copy()
    signed[:, 0] *= -1.0
    line_points = np.vstack([base, signed, _orthant_corners(n, signed=True)])

    return FamilyVerdict(
        alpha=alpha,
        valid_nonnegative=valid_nonnegative,
        sampled_nonnegative=_family_gap(n, eps, delta, alpha, base, tolerance),
        valid_line=valid_line,
        sampled_line=_family_gap(n, eps, delta, alpha, line_points, tolerance),
    )


def family_interval(eps: float, delta: float) -> tuple[float, float]:
    return 0.5 * eps - delta, 0.5 * eps + delta


# --------------------------------------------------
# Second counterexample: no approximant
# --------------------------------------------------
def reduce_to_additive(a: Callable[[Sequence[float]], float], n: int, eps: float, checks: int = 64) -> AdditiveCandidate:
    """m(x) = a(1, ..., 1, x) - (n - 1) f_G(1) x."""
    if n < 2:
        raise ConfigurationError("reduce_to_additive needs n >= 2")
    f_one = gajda_exact(1.0, eps)
    ones = [1.0] * (n - 1)

    def m(x: float) -> float:
        return a(ones + [x]) - (n - 1) * f_one * x

    c = m(1.0)
    flagged, note = False, ""
    for i in range(checks):
        x = math.ldexp(float((i * 37) % 101 - 50), -(i % 9))
        y = math.ldexp(float((i * 53) % 97 - 48), -(i % 7))
        if not math.isclose(m(x) + m(y), m(x + y), rel_tol=1e-12, abs_tol=1e-12 * (1.0 + abs(c))):
            flagged, note = True, f"m(x) + m(y) != m(x + y) at x={x}, y={y}"
            break
        if not math.isclose(m(x) + m(x), m(2.0 * x), rel_tol=1e-12, abs_tol=1e-12 * (1.0 + abs(c))):
            flagged, note = True, f"2 m(x) != m(2x) at x={x}"
            break
    if flagged:
        log.warning("⚠️ candidate is not additive on dyadics: %s", note)
    return AdditiveCandidate(c=c, evaluate=m, flagged=flagged, note=note)


def witness_depth(c: float, eps: float, delta: float) -> int:
    return math.ceil(6.0 * (delta + abs(c)) / eps) + 1


def _float_witness(m: AdditiveCandidate, eps: float, delta: float, depth: int) -> WitnessReport:
    x_star = math.ldexp(1.0, -depth)
    lhs = abs(gajda_exact(x_star, eps) - m(x_star))
    rhs = delta * abs(x_star)
    return WitnessReport(x_star=x_star, lhs=lhs, rhs=rhs, ratio=lhs / rhs, N=depth)


def _exact_witness(m: AdditiveCandidate, eps: float, delta: float, depth: int) -> WitnessReport:
    # on dyadics additivity pins m(x) = c x
    x_star = Fraction(1, 2**depth)
    f = gajda_exact_fraction(x_star, Fraction(eps))
    lhs = abs(f - Fraction(m.c) * x_star)
    rhs = Fraction(delta) * x_star
    return WitnessReport(
        x_star=float(x_star), lhs=float(lhs), rhs=float(rhs), ratio=float(lhs / rhs), N=depth, method="exact-dyadic"
    )


def verify_witness_exact(c: float, eps: float, delta: float, depth: int) -> bool:
    """Recompute |f_G(2^{-N}) - c 2^{-N}| > delta 2^{-N} from N alone, in rationals."""
    x_star = Fraction(1, 2**depth)
    gap = abs(gajda_exact_fraction(x_star, Fraction(eps)) - Fraction(c) * x_star)
    return gap > Fraction(delta) * x_star


def find_witness(m: AdditiveCandidate, eps: float, delta: float) -> WitnessReport:
    """Point x* = 2^{-N} with |f_G(x*) - m(x*)| > delta |x*|."""
    if eps <= 0.0 or delta <= 0.0:
        raise ConfigurationError("eps and delta must be positive")
    depth = witness_depth(m.c, eps, delta)
    if depth <= FLOAT_WITNESS_DEPTH:
        report = _float_witness(m, eps, delta, depth)
    else:
        report = _exact_witness(m, eps, delta, depth)
    if report.valid:
        return report

    log.warning("⚠️ analytic witness at N=%d failed (ratio %.6g); scanning dyadics", depth, report.ratio)
    for j in range(1, SCAN_DEPTH + 1):
        report = _float_witness(m, eps, delta, j)
        if report.valid:
            return report.model_copy(update={"method": "scan"})
    raise WitnessNotFoundError(
        f"no x in 2^-1 .. 2^-{SCAN_DEPTH} breaks |f_G(x) - m(x)| <= {delta:g} |x| (m(1) = {m.c:g}); "
        "the candidate is probably not additive"
    )


def fit_product_coefficient(n: int, eps: float, points: np.ndarray) -> float:
    """Least-squares c for gajda_multi(y) ~ c x_1...x_n over the sample."""
    numerator, denominator = [], []
    for y in points:
        product = math.prod(float(v) for v in y)
        numerator.append(gajda_multi(list(y), eps) * product)
        denominator.append(product * product)
    total = math.fsum(denominator)
    if total == 0.0:
        return 0.0
    return math.fsum(numerator) / total
