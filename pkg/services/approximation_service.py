# services/approximation_service.py
"""Approximate a symmetric g by the unique nearby symmetric n-additive map."""

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from models.control_spec import DirectMethodConfig, Mode
from models.results import ApproximationResult, PointwiseReport, SampleCheck, SlackEntry
from models.symmetric_spec import SymmetricSpec
from services.core_operators import (
    ControlFunction,
    ControlLike,
    PowerControl,
    as_control,
    as_tuple,
    check_convergence,
    defect_arguments,
    defect_with_scale,
    evaluate_symmetric,
    fold_control,
    scale_tuple,
    select_mode,
    stabilizer_series,
)
from services.direct_method import direct_method
from utils.errors import ArityError, ConfigurationError, HypothesisViolationError
from utils.logger import get_logger
from utils.sampling import DEFAULT_SEED, halton_box

log = get_logger("approximation")

HYPOTHESIS_RTOL = 1e-12
DEFAULT_HYPOTHESIS_SAMPLES = 512
# |D_n a(z)| allowance relative to the magnitudes it cancels
ADDITIVITY_RTOL = 1e-9


def _check_arity(spec: SymmetricSpec, phi: ControlLike) -> None:
    control = as_control(phi)
    if control.n != spec.n:
        raise ArityError(spec.n + 1, control.n + 1, what="control arity")


def check_defect_hypothesis(
    spec: SymmetricSpec,
    phi: ControlLike,
    samples: int = DEFAULT_HYPOTHESIS_SAMPLES,
    radius: float = 1.0,
    seed: int = DEFAULT_SEED,
    strict: bool = True,
) -> SampleCheck:
    """Check |D_n g(z)| <= phi(z) on scrambled-Halton points of [-radius, radius]^{d(n+1)}.

    With strict=True the first violation raises HypothesisViolationError.
    """
    _check_arity(spec, phi)
    control = as_control(phi)
    zs = halton_box(samples, (spec.n + 1, spec.d), -radius, radius, seed=seed)
    violations, worst, worst_point = 0, 0.0, None
    for z in zs:
        points = tuple(z)
        value, scale = defect_with_scale(spec, points)
        bound = control(points)
        if abs(value) > bound + HYPOTHESIS_RTOL * (scale + bound):
            if strict:
                raise HypothesisViolationError(points, value, bound)
            violations += 1
        ratio = abs(value) / bound if bound > 0.0 else 0.0
        if ratio > worst:
            worst, worst_point = ratio, [float(v) for v in z.reshape(-1)]
    return SampleCheck(name="defect-hypothesis", checked=samples, violations=violations, worst_ratio=worst, worst_point=worst_point)


def default_mode(control: ControlFunction) -> Mode:
    """Power controls pick their mode from r; other controls from the one ratio they declare."""
    if isinstance(control, PowerControl):
        return select_mode(control.r)
    declared = [mode for mode in (Mode.PLUS, Mode.MINUS) if control.tail_ratio(mode) is not None]
    if len(declared) != 1:
        raise ConfigurationError(
            "cannot infer the rescaling direction for this control: pass mode=Mode.PLUS or mode=Mode.MINUS"
        )
    return declared[0]


def double_step_gap(spec: SymmetricSpec, phi: ControlLike, y: Sequence) -> float:
    """r_n phi(y) - |g(2y) - 2^n g(y)|; nonnegative whenever the hypothesis holds."""
    points = as_tuple(y, spec.n, spec.d)
    doubled = scale_tuple(points, 1)
    gap = abs(evaluate_symmetric(spec, doubled) - 2.0**spec.n * evaluate_symmetric(spec, points))
    return fold_control(phi, points, spec.d) - gap


def approximate(
    spec: SymmetricSpec,
    phi: ControlLike,
    y: Sequence,
    mode: Optional[Mode] = None,
    cfg: Optional[DirectMethodConfig] = None,
    *,
    start_offset: int = 0,
    verify_hypothesis: bool = True,
    hypothesis_samples: int = DEFAULT_HYPOTHESIS_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> ApproximationResult:
    """a(y) = lim 2^{-nk} g(2^k y) (plus) or lim 2^{nk} g(2^{-k} y) (minus).

    `start_offset` k_0 starts the iteration at 2^{+-k_0} y and rescales the
    limit back; the result must not depend on it.
    """
    _check_arity(spec, phi)
    control = as_control(phi)
    n, d = spec.n, spec.d
    points = as_tuple(y, n, d)
    if mode is None:
        mode = default_mode(control)
    check_convergence(control, mode)

    if verify_hypothesis:
        radius = max(1.0, 2.0 * max(float(np.max(np.abs(p))) for p in points))
        check_defect_hypothesis(spec, control, samples=hypothesis_samples, radius=radius, seed=seed)

    if mode is Mode.PLUS:
        c = 2.0**n
        base = scale_tuple(points, start_offset)
        rescale = 2.0 ** (-n * start_offset)

        def b(k: int) -> float:
            return evaluate_symmetric(spec, scale_tuple(base, k))

        def alpha(k: int) -> float:
            return fold_control(control, scale_tuple(base, k), d)

    else:
        c = 2.0 ** (-n)
        base = scale_tuple(points, -start_offset)
        rescale = 2.0 ** (n * start_offset)

        def b(k: int) -> float:
            return evaluate_symmetric(spec, scale_tuple(base, -k))

        def alpha(k: int) -> float:
            return c * fold_control(control, scale_tuple(base, -k - 1), d)

    settings = {"c": c, "mode": mode, "tail_ratio": control.tail_ratio(mode, points)}
    cfg = cfg.model_copy(update=settings) if cfg is not None else DirectMethodConfig(**settings)
    outcome = direct_method(b, c, alpha, cfg)

    series = stabilizer_series(control, points, mode, k_terms=cfg.k_max, d=d)
    return ApproximationResult(
        value=outcome.limit * rescale,
        bound=series.total,
        iterations_used=outcome.iterations,
        trace=[(k, v * rescale) for k, v in outcome.trace],
        beta=outcome.beta * rescale,
        tail_bound=outcome.tail_bound * rescale,
        certified=outcome.certified and series.certified,
        mode=mode,
        start_offset=start_offset,
    )


def verify_pointwise_bound(
    spec: SymmetricSpec,
    approximants: Sequence[Union[float, ApproximationResult]],
    phi: ControlLike,
    mode: Mode,
    samples: Sequence[Sequence],
    tolerance: float = 1e-9,
    k_terms: int = 60,
) -> PointwiseReport:
    """Slack Phi(y) - |g(y) - a(y)| at every sample point, Phi = R_n^{+/-} phi."""
    if len(approximants) != len(samples):
        raise ArityError(len(samples), len(approximants), what="approximant list")
    entries = []
    for y, approx in zip(samples, approximants):
        points = as_tuple(y, spec.n, spec.d)
        a = approx.value if isinstance(approx, ApproximationResult) else float(approx)
        g = evaluate_symmetric(spec, points)
        bound = stabilizer_series(phi, points, mode, k_terms=k_terms, d=spec.d).total
        error = abs(g - a)
        slack = bound - error
        entries.append(
            SlackEntry(
                point=[float(v) for p in points for v in p],
                g=g,
                a=a,
                bound=bound,
                error=error,
                slack=slack,
                passed=slack >= -tolerance * max(1.0, abs(g)),
            )
        )
    report = PointwiseReport(entries=entries, tolerance=tolerance)
    if report.violations:
        log.warning("⚠️ %d of %d points break the certified bound", len(report.violations), len(entries))
    return report

def approximant_defect(
    spec: SymmetricSpec,
    phi: ControlLike,
    z: Sequence,
    mode: Optional[Mode] = None,
    cfg: Optional[DirectMethodConfig] = None,
) -> Tuple[float, float]:
    """D_n a(z) for the computed approximant a, plus the error it may carry.

    The allowance is the three remaining-tail bounds plus a relative rounding
    term; an n-additive a keeps |D_n a(z)| under it.
    """
    points = as_tuple(z, spec.n + 1, spec.d)
    runs = [approximate(spec, phi, t, mode, cfg, verify_hypothesis=False) for t in defect_arguments(points)]
    value = runs[0].value - runs[1].value - runs[2].value
    scale = sum(abs(run.value) for run in runs)
    allowance = sum(run.tail_bound for run in runs) + ADDITIVITY_RTOL * max(1.0, scale)
    return value, allowance


def check_approximant_additivity(
    spec: SymmetricSpec,
    phi: ControlLike,
    zs: Sequence,
    mode: Optional[Mode] = None,
    cfg: Optional[DirectMethodConfig] = None,
) -> SampleCheck:
    """|D_n a(z)| within its allowance at every sampled z."""
    violations, worst, worst_point = 0, 0.0, None
    for z in zs:
        value, allowance = approximant_defect(spec, phi, z, mode, cfg)
        ratio = abs(value) / allowance
        if ratio > 1.0:
            violations += 1
        if ratio > worst:
            worst, worst_point = ratio, [float(v) for v in np.asarray(z, dtype=float).reshape(-1)]
    if violations:
        log.warning("⚠️ approximant is not n-additive at %d of %d points", violations, len(zs))
    return SampleCheck(name="approximant-defect", checked=len(zs), violations=violations, worst_ratio=worst, worst_point=worst_point)
