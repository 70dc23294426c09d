# services/scenario_service.py
"""Drivers behind the report commands: sample or grid, evaluate, collect rows."""

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Sequence, Tuple

import numpy as np

from models.control_spec import ControlSpec, DirectMethodConfig, Mode, Power
from models.results import AdditiveCandidate
from models.scenario_config import ScenarioConfig
from models.symmetric_spec import ExactMultiadditive, SymmetricSpec
from services.approximation_service import (
    approximate,
    check_approximant_additivity,
    check_defect_hypothesis,
    verify_pointwise_bound,
)
from services.core_operators import (
    control_value,
    defect_with_scale,
    evaluate_symmetric,
    fold_control,
    kappa,
    kappa_closed_form,
    printed_fold_coefficient,
    select_mode,
    stabilizer_series,
    stability_constant,
)
from services.counterexample_service import (
    family_interval,
    find_witness,
    fit_product_coefficient,
    gajda_exact,
    verify_witness_exact,
    lemma_bound_sample,
    multi_defect_sample,
    nonuniqueness_family,
    reduce_to_additive,
)
from services.report_service import CommandReport, point_columns, rows_to_frame, scenario_id
from utils.errors import ConfigurationError, ThresholdError
from utils.logger import get_logger
from utils.sampling import make_rng, uniform_box

log = get_logger("scenarios")

DEFECT_RTOL = 1e-12
UNIQUENESS_RTOL = 1e-10
POINTWISE_RTOL = 1e-9
ZETA_FLAG = "zeta-third-branch: the overlapping interval (-inf, 1] is read as (-inf, -1]"


# --------------------------------------------------
# defect
# --------------------------------------------------
def run_defect(cfg: ScenarioConfig) -> CommandReport:
    """Sample z and compare |D_n g(z)| with phi(z)."""
    spec = cfg.symmetric_spec()
    control = cfg.control_spec()
    n, d = cfg.n, cfg.d
    rng = make_rng(cfg.sampling.seed)
    zs = uniform_box(rng, cfg.sampling.samples, (n + 1, d), -cfg.sampling.box, cfg.sampling.box)

    sid = scenario_id("defect", cfg)
    coords = point_columns("z", (n + 1) * d)
    rows, failures = [], 0
    for z in zs:
        points = tuple(z)
        value, scale = defect_with_scale(spec, points)
        bound = control_value(control, points, d)
        passed = abs(value) <= bound + DEFECT_RTOL * (scale + bound)
        failures += not passed
        row = {"scenario": sid, **dict(zip(coords, z.reshape(-1).tolist()))}
        row.update({"defect": value, "control": bound, "slack": bound - abs(value), "passed": passed})
        rows.append(row)

    frame = rows_to_frame(rows, ["scenario", *coords, "defect", "control", "slack", "passed"])
    summary = f"{len(rows) - failures}/{len(rows)} samples satisfy |D_n g| <= phi"
    return CommandReport(command="defect", frame=frame, failures=failures, summary=summary)


# --------------------------------------------------
# approx
# --------------------------------------------------
def grid_points(cfg: ScenarioConfig) -> List[np.ndarray]:
    axis = np.linspace(cfg.grid.min, cfg.grid.max, cfg.grid.count)
    shape = (cfg.n, cfg.d)
    return [np.array(p, dtype=float).reshape(shape) for p in itertools.product(axis, repeat=cfg.n * cfg.d)]


def _approx_point(task: Tuple[SymmetricSpec, ControlSpec, np.ndarray, Mode, int, float, Sequence[int]]) -> dict:
    spec, control, y, mode, k_max, tol, offsets = task
    cfg = DirectMethodConfig(c=2.0 ** (spec.n if mode is Mode.PLUS else -spec.n), k_max=k_max, tol=tol, mode=mode)
    runs = [approximate(spec, control, tuple(y), mode, cfg, start_offset=k0, verify_hypothesis=False) for k0 in offsets]
    main = runs[0]
    values = [run.value for run in runs]
    spread = max(values) - min(values)
    return {
        "a": main.value,
        "iterations": main.iterations_used,
        "certified": main.certified,
        "offset_spread": spread,
        "offsets_agree": spread <= UNIQUENESS_RTOL * max(1.0, abs(main.value)),
    }


def run_approx(cfg: ScenarioConfig) -> CommandReport:
    """Approximate g on every grid point, check the certified bound and the additivity of a."""
    r = cfg.control.r
    if r == 1.0:
        raise ThresholdError("approx refuses r = 1 (the stability threshold); run `hyers-lab threshold` instead")
    mode = select_mode(r)
    spec = cfg.symmetric_spec()
    control = cfg.control_spec()
    offsets = cfg.iteration.offsets or [0]

    radius = max(1.0, 2.0 * max(abs(cfg.grid.min), abs(cfg.grid.max)))
    check_defect_hypothesis(spec, control, samples=cfg.sampling.hypothesis_samples, radius=radius, seed=cfg.sampling.seed)

    points = grid_points(cfg)
    tasks = [(spec, control, y, mode, cfg.iteration.k_max, cfg.iteration.tol, offsets) for y in points]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_approx_point, tasks, chunksize=max(1, len(tasks) // (4 * cfg.workers))))
    else:
        results = [_approx_point(task) for task in tasks]
    pointwise = verify_pointwise_bound(
        spec, [result["a"] for result in results], control, mode, points,
        tolerance=POINTWISE_RTOL, k_terms=cfg.iteration.k_max,
    )

    sid = scenario_id("approx", cfg)
    coords = point_columns("y", cfg.n * cfg.d)
    rows, failures = [], 0
    for y, result, entry in zip(points, results, pointwise.entries):
        passed = entry.passed and result["certified"] and result["offsets_agree"]
        failures += not passed
        rows.append(
            {
                "scenario": sid,
                "row_type": "point",
                **dict(zip(coords, y.reshape(-1).tolist())),
                "g": entry.g,
                "bound": entry.bound,
                "error": entry.error,
                "slack": entry.slack,
                **result,
                "mode": mode.value,
                "passed": passed,
            }
        )

    iteration = DirectMethodConfig(c=2.0 ** (cfg.n if mode is Mode.PLUS else -cfg.n), k_max=cfg.iteration.k_max,
                                   tol=cfg.iteration.tol, mode=mode)
    zs = uniform_box(make_rng(cfg.sampling.seed), cfg.sampling.additivity_samples, (cfg.n + 1, cfg.d),
                     cfg.grid.min, cfg.grid.max)
    additivity = check_approximant_additivity(spec, control, zs, mode, iteration)
    failures += not additivity.passed
    rows.append({"scenario": sid, "row_type": "additivity", "mode": mode.value, "checked": additivity.checked,
                 "violations": additivity.violations, "approximant_defect_ratio": additivity.worst_ratio,
                 "passed": additivity.passed})

    constant = stability_constant(cfg.n, r)
    flags = []
    if not constant.agree:
        flags.append(
            f"stability-constant-mismatch: n={cfg.n} r={r:g} definitional={constant.definitional:.17g} "
            f"printed={constant.printed:.17g}"
        )
    worst = pointwise.worst_slack
    rows.append(
        {
            "scenario": sid,
            "row_type": "summary",
            "slack": worst if worst is not None else math.nan,
            "mode": mode.value,
            "constant_definitional": constant.definitional,
            "constant_printed": constant.printed,
            "passed": failures == 0,
        }
    )
    columns = ["scenario", "row_type", *coords, "g", "a", "bound", "error", "slack", "iterations", "certified",
               "offset_spread", "offsets_agree", "checked", "violations", "approximant_defect_ratio", "mode",
               "constant_definitional", "constant_printed", "passed"]
    summary = (
        f"{len(points) - len(pointwise.violations)}/{len(points)} grid points within the certified bound ({mode.value} mode); "
        f"approximant n-additive at {additivity.checked - additivity.violations}/{additivity.checked} samples"
    )
    return CommandReport(command="approx", frame=rows_to_frame(rows, columns), flags=flags, failures=failures, summary=summary)


# --------------------------------------------------
# constants
# --------------------------------------------------
def run_constants(cfg: ScenarioConfig) -> CommandReport:
    """Definitional vs printed constants, confirmed by summing the series at (1, ..., 1)."""
    eps = cfg.control.eps
    sid = scenario_id("constants", cfg)
    rows, failures, mismatched, skipped = [], 0, [], []
    for n in cfg.constants.n_values:
        for r in cfg.constants.r_values:
            if r == 1.0:
                skipped.append(n)
                continue
            mode = select_mode(r)
            control = ControlSpec(n=n, kind=Power(eps=eps, r=r))
            ones = tuple(1.0 for _ in range(n))
            constant = stability_constant(n, r)
            k = kappa(n, r)
            fold = fold_control(control, ones)
            series = stabilizer_series(control, ones, mode, k_terms=cfg.iteration.k_max)
            expected = eps * constant.definitional
            fold_match = math.isclose(fold, eps * k, rel_tol=1e-10)
            series_match = math.isclose(series.total, expected, rel_tol=1e-10)
            passed = fold_match and series_match
            failures += not passed
            if not constant.agree:
                mismatched.append(f"(n={n}, r={r:g})")
            rows.append(
                {
                    "scenario": sid,
                    "n": n,
                    "r": r,
                    "mode": mode.value,
                    "kappa": k,
                    "kappa_closed_form": kappa_closed_form(n, r),
                    "kappa_printed": printed_fold_coefficient(n, r),
                    "constant_definitional": constant.definitional,
                    "constant_printed": constant.printed,
                    "constants_agree": constant.agree,
                    "fold": fold,
                    "series_value": series.total,
                    "series_expected": expected,
                    "fold_match": fold_match,
                    "series_match": series_match,
                    "passed": passed,
                }
            )

    flags = []
    if mismatched:
        flags.append("stability-constant-mismatch: printed constant differs from the summed fold at " + ", ".join(mismatched))
    if skipped:
        flags.append("r=1 skipped: no stability constant at the threshold")
    columns = ["scenario", "n", "r", "mode", "kappa", "kappa_closed_form", "kappa_printed", "constant_definitional",
               "constant_printed", "constants_agree", "fold", "series_value", "series_expected", "fold_match",
               "series_match", "passed"]
    summary = f"{len(rows) - failures}/{len(rows)} (n, r) rows confirmed by series summation; {len(mismatched)} printed-constant mismatches"
    return CommandReport(command="constants", frame=rows_to_frame(rows, columns), flags=flags, failures=failures, summary=summary)


# --------------------------------------------------
# threshold
# --------------------------------------------------
THRESHOLD_COLUMNS = ["scenario", "section", "alpha", "valid", "sampled", "valid_line", "sampled_line", "candidate_c",
                     "m_c", "delta", "x_star", "N", "lhs", "rhs", "ratio", "method", "checked", "violations",
                     "worst_ratio", "passed"]


def _alpha_grid(cfg: ScenarioConfig, eps: float) -> List[float]:
    if cfg.threshold.alphas is not None:
        return list(cfg.threshold.alphas)
    low, high = family_interval(eps, cfg.threshold.delta)
    margin = 0.25 * (high - low)
    return np.linspace(low - margin, high + margin, cfg.threshold.alpha_count).tolist()


def _witness_rows(sid: str, candidates, eps: float, deltas, reduce) -> Tuple[List[dict], int]:
    rows, failures = [], 0
    for c in candidates:
        m = reduce(c)
        for delta in deltas:
            report = find_witness(m, eps, delta)
            if report.method == "exact-dyadic":
                reverified = verify_witness_exact(m.c, eps, delta, report.N)
            else:
                reverified = abs(gajda_exact(report.x_star, eps) - m(report.x_star)) > delta * abs(report.x_star)
            passed = report.valid and reverified and not m.flagged
            failures += not passed
            rows.append(
                {
                    "scenario": sid,
                    "section": "witness",
                    "candidate_c": c,
                    "m_c": m.c,
                    "delta": delta,
                    "x_star": report.x_star,
                    "N": report.N,
                    "lhs": report.lhs,
                    "rhs": report.rhs,
                    "ratio": report.ratio,
                    "method": report.method,
                    "passed": passed,
                }
            )
    return rows, failures


def _linear_candidate(c: float) -> AdditiveCandidate:
    return AdditiveCandidate(c=c, evaluate=lambda x: c * x)


def run_threshold(cfg: ScenarioConfig) -> CommandReport:
    """Both counterexamples at r = 1 (n >= 2), or the one-variable lemma (n = 1)."""
    n, eps = cfg.n, cfg.function_eps
    if cfg.d != 1:
        raise ConfigurationError("threshold counterexamples live on the real line: use d = 1")
    sid = scenario_id("threshold", cfg)
    rng = make_rng(cfg.sampling.seed)
    box = cfg.sampling.box
    deltas = cfg.threshold.deltas
    rows, failures, flags = [], 0, [ZETA_FLAG]

    if n == 1:
        pairs = uniform_box(rng, cfg.sampling.samples, (2,), -box, box)
        check = lemma_bound_sample(eps, pairs)
        failures += not check.passed
        rows.append({"scenario": sid, "section": "cauchy-defect-bound", "checked": check.checked,
                     "violations": check.violations, "worst_ratio": check.worst_ratio, "passed": check.passed})
        witness_rows, witness_failures = _witness_rows(
            sid, cfg.threshold.candidates, eps, deltas, _linear_candidate
        )
        rows.extend(witness_rows)
        failures += witness_failures
        summary = f"cauchy-defect bound: {check.violations} violations; {len(witness_rows) - witness_failures}/{len(witness_rows)} witnesses"
        return CommandReport(command="threshold", frame=rows_to_frame(rows, THRESHOLD_COLUMNS), flags=flags, failures=failures, summary=summary)

    # first counterexample: an interval of approximants
    family_samples = uniform_box(rng, min(cfg.sampling.samples, 2000), (n,), 0.0, box)
    delta = cfg.threshold.delta
    line_only_fails = False
    for alpha in _alpha_grid(cfg, eps):
        verdict = nonuniqueness_family(n, eps, delta, alpha, family_samples)
        failures += not verdict.consistent
        line_only_fails = line_only_fails or (verdict.valid_nonnegative and not verdict.valid_line)
        rows.append({"scenario": sid, "section": "nonuniqueness", "alpha": alpha, "delta": delta,
                     "valid": verdict.valid_nonnegative, "sampled": verdict.sampled_nonnegative,
                     "valid_line": verdict.valid_line, "sampled_line": verdict.sampled_line,
                     "passed": verdict.consistent})
    if line_only_fails:
        flags.append(
            "nonuniqueness-domain: alpha x_1...x_n approximates (eps/2)|x_1...x_n| within delta only on [0, inf)^n; "
            "on R^n it needs |alpha| + eps/2 <= delta"
        )

    # second counterexample: no approximant
    zs = uniform_box(rng, cfg.sampling.samples, (n + 1,), -box, box)
    check = multi_defect_sample(n, eps, zs)
    failures += not check.passed
    rows.append({"scenario": sid, "section": "multi-defect-bound", "checked": check.checked,
                 "violations": check.violations, "worst_ratio": check.worst_ratio, "passed": check.passed})

    candidates = list(cfg.threshold.candidates)
    if cfg.threshold.fit_candidate:
        grid = np.array([y.reshape(-1) for y in grid_points(cfg)])
        candidates.append(fit_product_coefficient(n, eps, grid))

    def reduce(c: float):
        product = SymmetricSpec(n=n, d=1, kind=ExactMultiadditive(c=c))
        return reduce_to_additive(lambda y: evaluate_symmetric(product, y), n, eps)

    witness_rows, witness_failures = _witness_rows(sid, candidates, eps, deltas, reduce)
    rows.extend(witness_rows)
    failures += witness_failures
    summary = (
        f"{len(rows) - failures}/{len(rows)} threshold rows pass; "
        f"{sum(1 for r in witness_rows if r['passed'])} witnesses certified"
    )
    return CommandReport(command="threshold", frame=rows_to_frame(rows, THRESHOLD_COLUMNS), flags=flags, failures=failures, summary=summary)
