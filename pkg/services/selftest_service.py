# services/selftest_service.py
"""Invariant suites for the core operators and the counterexamples.

Every check draws from a fixed seed, so two runs produce the same rows.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from models.control_spec import ControlSpec, DirectMethodConfig, Mode, Power
from models.symmetric_spec import AbsProduct, ExactMultiadditive, PowerPerturbed, SymmetricSpec
from services.approximation_service import approximant_defect, approximate, double_step_gap
from services.core_operators import (
    as_tuple,
    defect,
    evaluate_symmetric,
    fold_control,
    kappa,
    kappa_closed_form,
    scale_tuple,
    stabilizer_series,
)
from services.counterexample_service import (
    cauchy_defect,
    find_witness,
    gajda_exact,
    gajda_series,
    multi_defect_sample,
    reduce_to_additive,
    zeta,
    zeta_literal_branches,
)
from services.direct_method import direct_method
from services.report_service import CommandReport, rows_to_frame
from utils.errors import ConfigurationError, HyersLabError
from utils.logger import get_logger
from utils.sampling import DEFAULT_SEED, make_rng, uniform_box

log = get_logger("selftest")

FAULTS = ("zeta-literal-branch",)
SELFTEST_COLUMNS = ["suite", "invariant", "checked", "failures", "passed", "detail"]


@dataclass
class InvariantCheck:
    """Counts failures of one invariant and remembers the first one."""

    suite: str
    invariant: str
    checked: int = 0
    failures: int = 0
    detail: str = ""

    def record(self, ok: bool, where: str = "") -> None:
        self.checked += 1
        if not ok:
            self.failures += 1
            if not self.detail:
                self.detail = where

    def row(self) -> dict:
        return {
            "suite": self.suite,
            "invariant": self.invariant,
            "checked": self.checked,
            "failures": self.failures,
            "passed": self.failures == 0,
            "detail": self.detail,
        }


@dataclass
class SelftestContext:
    seed: int = DEFAULT_SEED
    samples: int = 200
    fault: Optional[str] = None
    checks: List[InvariantCheck] = field(default_factory=list)

    def check(self, suite: str, invariant: str) -> InvariantCheck:
        item = InvariantCheck(suite=suite, invariant=invariant)
        self.checks.append(item)
        return item

    def rng(self, stream: int) -> np.random.Generator:
        return make_rng(self.seed + stream)


def _close(a: float, b: float, rel: float = 1e-12, scale: float = 1.0) -> bool:
    return abs(a - b) <= rel * max(scale, abs(a), abs(b))


# --------------------------------------------------
# core-operators suite
# --------------------------------------------------
CORE = "core-operators"


def _core_catalog(n: int) -> List[SymmetricSpec]:
    return [
        SymmetricSpec(n=n, kind=ExactMultiadditive(c=1.5)),
        SymmetricSpec(n=n, kind=PowerPerturbed(c=1.0, beta=0.1, r=0.5)),
        SymmetricSpec(n=n, kind=AbsProduct(eps=1.0)),
    ]


def _check_symmetry(ctx: SelftestContext) -> None:
    item = ctx.check(CORE, "symmetry")
    rng = ctx.rng(1)
    for n in (2, 3):
        ys = uniform_box(rng, ctx.samples // 4, (n,), -10.0, 10.0)
        for spec in _core_catalog(n):
            for y in ys:
                base = evaluate_symmetric(spec, list(y))
                for perm in itertools.permutations(range(n)):
                    value = evaluate_symmetric(spec, [y[i] for i in perm])
                    item.record(value == base, f"{spec.name} y={y.tolist()} perm={perm}")


def _check_multiadditive_kernel(ctx: SelftestContext) -> None:
    item = ctx.check(CORE, "multiadditive-kernel")
    rng = ctx.rng(2)
    for n in (1, 2, 3):
        spec = SymmetricSpec(n=n, kind=ExactMultiadditive(c=0.75))
        for z in uniform_box(rng, ctx.samples // 3, (n + 1,), -10.0, 10.0):
            scale = math.prod(abs(v) for v in z[:-2]) * (abs(z[-2]) + abs(z[-1]) + 1.0)
            item.record(abs(defect(spec, list(z))) <= 1e-12 * max(1.0, scale), f"n={n} z={z.tolist()}")


def _check_fold_homogeneity(ctx: SelftestContext) -> None:
    item = ctx.check(CORE, "fold-homogeneity")
    rng = ctx.rng(3)
    for n, r in itertools.product((1, 2, 3), (-0.5, 0.0, 0.5, 2.0)):
        control = ControlSpec(n=n, kind=Power(eps=1.0, r=r))
        for y in uniform_box(rng, 8, (n,), 0.25, 8.0):
            points = as_tuple(list(y), n)
            base = fold_control(control, points)
            for k in (-3, 1, 4):
                scaled = fold_control(control, scale_tuple(points, k))
                item.record(_close(scaled, 2.0 ** (n * k * r) * base), f"n={n} r={r} k={k} y={y.tolist()}")


def _check_closed_forms(ctx: SelftestContext) -> None:
    item = ctx.check(CORE, "closed-form-equivalence")
    rng = ctx.rng(4)
    for n, r in itertools.product((1, 2, 3, 4), (-1.0, 0.0, 0.5, 1.0, 2.0)):
        item.record(_close(kappa(n, r), kappa_closed_form(n, r), rel=1e-10), f"kappa n={n} r={r}")
        control = ControlSpec(n=n, kind=Power(eps=1.0, r=r))
        for y in uniform_box(rng, 4, (n,), 0.5, 4.0):
            expected = kappa(n, r) * math.prod(abs(v) ** r for v in y)
            item.record(_close(fold_control(control, list(y)), expected, rel=1e-10), f"fold n={n} r={r} y={y.tolist()}")


def _check_series_equivalence(ctx: SelftestContext) -> None:
    item = ctx.check(CORE, "series-equivalence")
    rng = ctx.rng(5)
    for n, r in itertools.product((1, 2, 3), (-0.5, 0.0, 0.5, 1.5, 3.0)):
        control = ControlSpec(n=n, kind=Power(eps=1.0, r=r))
        mode = Mode.PLUS if r < 1.0 else Mode.MINUS
        for y in uniform_box(rng, 4, (n,), 0.5, 4.0):
            series = stabilizer_series(control, list(y), mode, k_terms=60)
            ok = series.closed_form is not None and abs(series.value - series.closed_form) <= series.tail_bound + 1e-12 * series.closed_form
            item.record(ok, f"n={n} r={r} y={y.tolist()}")


def _check_double_step(ctx: SelftestContext) -> None:
    item = ctx.check(CORE, "double-step-inequality")
    rng = ctx.rng(6)
    for n, r in ((1, 0.5), (2, 0.5), (2, 2.0), (3, 0.25)):
        spec = SymmetricSpec(n=n, kind=PowerPerturbed(c=1.0, beta=0.1, r=r))
        control = ControlSpec(n=n, kind=Power(eps=1.0, r=r))
        for y in uniform_box(rng, ctx.samples // 8, (n,), -6.0, 6.0):
            gap = double_step_gap(spec, control, list(y))
            item.record(gap >= -1e-12 * max(1.0, abs(evaluate_symmetric(spec, list(y)))), f"n={n} r={r} y={y.tolist()}")


# the n = 1, r = 0.5 case decays like 2^{-k/2} and needs about 85 steps to reach tol
APPROX_ITERATION = DirectMethodConfig(c=1.0, k_max=200)


def _approx_cases():
    yield SymmetricSpec(n=2, kind=PowerPerturbed(c=1.0, beta=0.1, r=0.5)), ControlSpec(n=2, kind=Power(eps=1.0, r=0.5))
    yield SymmetricSpec(n=2, kind=PowerPerturbed(c=1.0, beta=0.1, r=2.0)), ControlSpec(n=2, kind=Power(eps=1.0, r=2.0))
    yield SymmetricSpec(n=1, kind=PowerPerturbed(c=-2.0, beta=0.3, r=0.5)), ControlSpec(n=1, kind=Power(eps=0.3, r=0.5))


def _check_approximation(ctx: SelftestContext) -> None:
    fixed = ctx.check(CORE, "fixed-point")
    unique = ctx.check(CORE, "uniqueness-under-start-offsets")
    bound = ctx.check(CORE, "certified-bound")
    rng = ctx.rng(7)
    for spec, control in _approx_cases():
        n = spec.n
        exact = SymmetricSpec(n=n, kind=ExactMultiadditive(c=spec.kind.c))
        for y in uniform_box(rng, 6, (n,), -4.0, 4.0):
            runs = [approximate(spec, control, list(y), cfg=APPROX_ITERATION, start_offset=k0, verify_hypothesis=False) for k0 in range(4)]
            a = runs[0].value
            target = evaluate_symmetric(exact, list(y))
            fixed.record(_close(a, target, rel=1e-9), f"{spec.name} y={y.tolist()} a={a!r} expected={target!r}")
            spread = max(run.value for run in runs) - min(run.value for run in runs)
            unique.record(spread <= 1e-10 * max(1.0, abs(a)), f"{spec.name} y={y.tolist()} spread={spread:.3g}")
            error = abs(evaluate_symmetric(spec, list(y)) - a)
            bound.record(runs[0].certified and error <= runs[0].bound + 1e-9, f"{spec.name} y={y.tolist()}")


def _check_approximant_additivity(ctx: SelftestContext) -> None:
    item = ctx.check(CORE, "approximant-additivity")
    rng = ctx.rng(8)
    for spec, control in _approx_cases():
        for z in uniform_box(rng, 4, (spec.n + 1,), -4.0, 4.0):
            value, allowance = approximant_defect(spec, control, list(z), cfg=APPROX_ITERATION)
            item.record(abs(value) <= allowance, f"{spec.name} z={z.tolist()} D_n a={value!r}")


def _check_direct_method(ctx: SelftestContext) -> None:
    item = ctx.check(CORE, "direct-method-certificate")
    cases = [
        (lambda k: 5.0 * 2.0**k, 2.0, lambda k: 0.0, None),
        (lambda k: 2.0**k + 1.0, 2.0, lambda k: 1.0, 0.5),
        (lambda k: 2.0 ** (-k) * (3.0 + 2.0 ** (-k)), 0.5, lambda k: 4.0 ** (-k - 1), None),
    ]
    for b, c, alpha, ratio in cases:
        cfg = DirectMethodConfig(c=c, tail_ratio=ratio)
        try:
            result = direct_method(b, c, alpha, cfg)
        except HyersLabError as e:
            item.record(False, str(e))
            continue
        item.record(abs(result.limit - result.first_term) <= result.beta + 1e-12 * max(1.0, abs(result.limit)), f"c={c}")


CORE_CHECKS: List[Callable[[SelftestContext], None]] = [
    _check_symmetry,
    _check_multiadditive_kernel,
    _check_fold_homogeneity,
    _check_closed_forms,
    _check_series_equivalence,
    _check_double_step,
    _check_approximation,
    _check_approximant_additivity,
    _check_direct_method,
]


# --------------------------------------------------
# counterexamples suite
# --------------------------------------------------
COUNTER = "counterexamples"
SERIES_TERMS = 80


def _f_under_test(ctx: SelftestContext) -> Callable[[float, float], float]:
    """f_G as the suite sees it: the closed form, or the series with a broken zeta."""
    if ctx.fault == "zeta-literal-branch":
        return lambda x, eps: gajda_series(x, eps, SERIES_TERMS, zeta_fn=zeta_literal_branches)[0]
    return gajda_exact


def _zeta_under_test(ctx: SelftestContext):
    return zeta_literal_branches if ctx.fault == "zeta-literal-branch" else zeta


def _check_series_oracle(ctx: SelftestContext) -> None:
    item = ctx.check(COUNTER, "closed-form-vs-series")
    f = _f_under_test(ctx)
    rng = ctx.rng(11)
    for eps in (1.0, 6.0):
        for x in uniform_box(rng, ctx.samples // 2, (), -5.0, 5.0):
            x = float(x)
            series, tail = gajda_series(x, eps, SERIES_TERMS)
            item.record(abs(f(x, eps) - series) <= tail + 1e-12 * eps, f"x={x!r} eps={eps}")


def _check_boundedness(ctx: SelftestContext) -> None:
    item = ctx.check(COUNTER, "bounded-by-eps-over-3")
    f = _f_under_test(ctx)
    rng = ctx.rng(12)
    for x in uniform_box(rng, ctx.samples, (), -100.0, 100.0):
        x = float(x)
        item.record(abs(f(x, 1.0)) <= 1.0 / 3.0 + 1e-12, f"x={x!r}")


def _check_oddness(ctx: SelftestContext) -> None:
    item = ctx.check(COUNTER, "oddness")
    f = _f_under_test(ctx)
    rng = ctx.rng(13)
    for x in uniform_box(rng, ctx.samples, (), -20.0, 20.0):
        x = float(x)
        item.record(_close(f(-x, 1.0), -f(x, 1.0), scale=1e-3), f"x={x!r}")


def _check_doubling(ctx: SelftestContext) -> None:
    item = ctx.check(COUNTER, "doubling-identity")
    f = _f_under_test(ctx)
    z = _zeta_under_test(ctx)
    rng = ctx.rng(14)
    for x in uniform_box(rng, ctx.samples, (), -20.0, 20.0):
        x = float(x)
        lhs = f(2.0 * x, 1.0)
        rhs = 2.0 * (f(x, 1.0) - z(x, 1.0))
        item.record(_close(lhs, rhs, rel=1e-10, scale=1e-3), f"x={x!r}")


def _check_cauchy_bound(ctx: SelftestContext) -> None:
    item = ctx.check(COUNTER, "cauchy-defect-bound")
    f = _f_under_test(ctx)
    rng = ctx.rng(15)
    for x, y in uniform_box(rng, ctx.samples, (2,), -100.0, 100.0):
        x, y = float(x), float(y)
        if f is gajda_exact:
            lhs = abs(cauchy_defect(x, y, 1.0))
        else:
            lhs = abs(f(x + y, 1.0) - f(x, 1.0) - f(y, 1.0))
        item.record(lhs <= abs(x) + abs(y) + 1e-12, f"x={x!r} y={y!r}")


def _check_multi_defect(ctx: SelftestContext) -> None:
    item = ctx.check(COUNTER, "multi-defect-bound")
    rng = ctx.rng(16)
    for n in (2, 3):
        zs = uniform_box(rng, ctx.samples // 2, (n + 1,), -10.0, 10.0)
        check = multi_defect_sample(n, 1.0, zs)
        item.checked += check.checked
        item.failures += check.violations
        if check.violations and not item.detail:
            item.detail = f"n={n} worst ratio {check.worst_ratio:.6g} at {check.worst_point}"


def _check_witnesses(ctx: SelftestContext) -> None:
    item = ctx.check(COUNTER, "witness-validity")
    for n in (2, 3):
        for c in (0.0, 1.0, -10.0):
            product = SymmetricSpec(n=n, kind=ExactMultiadditive(c=c))
            m = reduce_to_additive(lambda y, spec=product: evaluate_symmetric(spec, y), n, 1.0)
            for delta in (0.25, 4.0):
                report = find_witness(m, 1.0, delta)
                item.record(report.valid and not m.flagged, f"n={n} c={c} delta={delta} ratio={report.ratio:.6g}")


COUNTER_CHECKS: List[Callable[[SelftestContext], None]] = [
    _check_series_oracle,
    _check_boundedness,
    _check_oddness,
    _check_doubling,
    _check_cauchy_bound,
    _check_multi_defect,
    _check_witnesses,
]


# --------------------------------------------------
# Entry point
# --------------------------------------------------
def run_selftest(seed: int = DEFAULT_SEED, fault: Optional[str] = None, samples: int = 200) -> CommandReport:
    """Run both suites; one row per invariant."""
    if fault is not None and fault not in FAULTS:
        raise ConfigurationError(f"unknown fault '{fault}'; choose one of {', '.join(FAULTS)}")
    ctx = SelftestContext(seed=seed, samples=samples, fault=fault)
    if fault:
        log.warning("⚠️ fault injected: %s", fault)

    for check in CORE_CHECKS + COUNTER_CHECKS:
        log.debug("running %s", check.__name__)
        check(ctx)

    rows = [item.row() for item in ctx.checks]
    failed = [f"{item.suite}/{item.invariant}" for item in ctx.checks if item.failures]
    for name in failed:
        log.warning("⚠️ invariant failed: %s", name)
    flags = [f"fault-injected: {fault}"] if fault else []
    summary = f"{len(rows) - len(failed)}/{len(rows)} invariants hold"
    if failed:
        summary += "; failing: " + ", ".join(failed)
    return CommandReport(command="selftest", frame=rows_to_frame(rows, SELFTEST_COLUMNS), flags=flags, failures=len(failed), summary=summary)
