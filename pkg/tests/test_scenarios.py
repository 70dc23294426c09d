import json

import pytest

from models.scenario_config import ScenarioConfig
from services.report_service import ReportService, config_hash
from services.scenario_service import run_approx, run_constants, run_defect, run_threshold
from utils.errors import ConfigurationError, ThresholdError


# --------------------------------------------------
# defect
# --------------------------------------------------
@pytest.mark.parametrize(
    "function, control",
    [
        ({"kind": "exact", "c": 3.0}, {"r": 0.0}),
        ({"kind": "power-perturbed", "beta": 0.1}, {"r": 0.5}),
        ({"kind": "abs-product"}, {"r": 1.0}),
    ],
)
def test_defect_within_control(function, control):
    cfg = ScenarioConfig.from_dict({"n": 2, "function": function, "control": control, "sampling": {"samples": 300}})
    report = run_defect(cfg)
    assert report.passed
    assert len(report.frame) == 300
    assert list(report.frame.columns[:4]) == ["scenario", "z1", "z2", "z3"]


def test_gajda_multi_defect_within_control():
    cfg = ScenarioConfig.from_dict(
        {"n": 3, "function": {"kind": "gajda-multi"}, "control": {"eps": 1.0, "r": 1.0}, "sampling": {"samples": 300}}
    )
    assert run_defect(cfg).passed


def test_defect_failures_are_counted():
    cfg = ScenarioConfig.from_dict(
        {"n": 2, "function": {"kind": "power-perturbed", "beta": 10.0}, "control": {"eps": 0.01, "r": 0.5}, "sampling": {"samples": 100}}
    )
    report = run_defect(cfg)
    assert report.failures > 0
    assert not report.passed


# --------------------------------------------------
# approx
# --------------------------------------------------
@pytest.mark.parametrize("r, mode", [(0.5, "plus"), (2.0, "minus")])
def test_approx_grid(approx_config, r, mode):
    report = run_approx(approx_config(r, offsets=(0, 1, 2, 3)))
    assert report.passed, report.summary
    points = report.frame[report.frame["row_type"] == "point"]
    assert len(points) == 81
    assert set(points["mode"]) == {mode}
    assert (points["iterations"] <= 60).all()
    assert ((points["a"] - points["y1"] * points["y2"]).abs() <= 1e-9).all()
    assert points["offsets_agree"].all()


def test_approx_flags_constant_mismatch(approx_config):
    report = run_approx(approx_config(0.5))
    assert any(flag.startswith("stability-constant-mismatch") for flag in report.flags)
    summary = report.frame[report.frame["row_type"] == "summary"].iloc[0]
    assert summary["constant_definitional"] != pytest.approx(summary["constant_printed"])


def test_approx_checks_approximant_additivity(approx_config):
    report = run_approx(approx_config(0.5))
    additivity = report.frame[report.frame["row_type"] == "additivity"].iloc[0]
    assert additivity["checked"] == 16
    assert additivity["violations"] == 0
    assert additivity["approximant_defect_ratio"] <= 1.0
    assert additivity["passed"]
    assert "n-additive at 16/16" in report.summary


def test_approx_worker_pool_matches_serial_run():
    base = {"n": 2, "function": {"kind": "power-perturbed", "beta": 0.1}, "control": {"r": 0.5},
            "grid": {"min": -2.0, "max": 2.0, "count": 4}, "sampling": {"additivity_samples": 4}}
    serial = ScenarioConfig.from_dict(base)
    pooled = ScenarioConfig.from_dict({**base, "workers": 2})
    assert config_hash(serial) == config_hash(pooled)
    assert run_approx(pooled).frame.equals(run_approx(serial).frame)


def test_approx_refuses_threshold(approx_config):
    with pytest.raises(ThresholdError, match="threshold"):
        run_approx(approx_config(1.0))


# --------------------------------------------------
# constants
# --------------------------------------------------
def test_constants_table():
    report = run_constants(ScenarioConfig())
    assert report.passed
    frame = report.frame
    row = frame[(frame["n"] == 2) & (frame["r"] == 0.0)].iloc[0]
    assert row["constant_definitional"] == pytest.approx(2.0)
    assert row["constant_printed"] == pytest.approx(1.0)
    assert row["kappa"] == pytest.approx(6.0)
    assert not row["constants_agree"]
    assert frame[frame["n"] == 1]["constants_agree"].all()
    assert not any(flag.startswith("r=1 skipped") for flag in report.flags)


def test_constants_skip_threshold():
    cfg = ScenarioConfig.from_dict({"constants": {"n_values": [2], "r_values": [0.5, 1.0]}})
    report = run_constants(cfg)
    assert len(report.frame) == 1
    assert any(flag.startswith("r=1 skipped") for flag in report.flags)


# --------------------------------------------------
# threshold
# --------------------------------------------------
def test_threshold_nonuniqueness_interval():
    cfg = ScenarioConfig.from_dict(
        {"n": 2, "control": {"eps": 1.0}, "threshold": {"delta": 0.25, "alphas": [0.0, 0.25, 0.5, 0.75, 1.0]}}
    )
    report = run_threshold(cfg)
    assert report.passed, report.summary
    family = report.frame[report.frame["section"] == "nonuniqueness"]
    assert list(family["valid"]) == [False, True, True, True, False]
    assert any(flag.startswith("zeta-third-branch") for flag in report.flags)
    assert any(flag.startswith("nonuniqueness-domain") for flag in report.flags)


def test_threshold_default_alphas_straddle_the_interval():
    cfg = ScenarioConfig.from_dict({"n": 2, "control": {"eps": 1.0}, "threshold": {"delta": 0.25, "alpha_count": 9}})
    family = run_threshold(cfg).frame.query("section == 'nonuniqueness'")
    assert family["alpha"].iloc[0] == pytest.approx(0.125)
    assert family["alpha"].iloc[-1] == pytest.approx(0.875)
    assert list(family["valid"]) == [False, False, True, True, True, True, True, False, False]


def test_threshold_deep_witness_rows():
    cfg = ScenarioConfig.from_dict(
        {"n": 2, "control": {"eps": 1.0}, "threshold": {"candidates": [1000.0], "deltas": [1.0], "fit_candidate": False}}
    )
    witnesses = run_threshold(cfg).frame.query("section == 'witness'")
    assert list(witnesses["method"]) == ["exact-dyadic"]
    assert witnesses["N"].iloc[0] > 1000
    assert witnesses["passed"].all()


def test_threshold_witnesses():
    cfg = ScenarioConfig.from_dict({"n": 2, "control": {"eps": 1.0}})
    report = run_threshold(cfg)
    witnesses = report.frame[report.frame["section"] == "witness"]
    # five fixed candidates plus the fitted one, four deltas each
    assert len(witnesses) == 24
    assert witnesses["passed"].all()
    assert (witnesses["ratio"] > 1.0).all()


def test_threshold_single_variable():
    cfg = ScenarioConfig.from_dict({"n": 1, "control": {"eps": 1.0}, "sampling": {"samples": 2000}})
    report = run_threshold(cfg)
    assert report.passed
    assert "cauchy-defect-bound" in set(report.frame["section"])


def test_threshold_needs_real_line():
    with pytest.raises(ConfigurationError):
        run_threshold(ScenarioConfig.from_dict({"n": 2, "d": 2}))


# --------------------------------------------------
# report files
# --------------------------------------------------
def test_csv_report_header(output_dir, read_report):
    cfg = ScenarioConfig.from_dict({"constants": {"n_values": [1, 2], "r_values": [0.0, 2.0]}})
    report = run_constants(cfg)
    path = ReportService(cfg).write(report)
    assert path == output_dir / "constants.csv"
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# tool: hyers-lab 0.1.0"
    assert "# command: constants" in lines
    assert "# seed: 24301" in lines
    assert "# prng: numpy.random.PCG64" in lines
    assert any(line.startswith("# flag: stability-constant-mismatch") for line in lines)
    frame = read_report(path)
    assert len(frame) == 4
    assert frame["kappa"].tolist() == report.frame["kappa"].tolist()


def test_json_report(tmp_path):
    cfg = ScenarioConfig.from_dict({"n": 2, "output": {"format": "json", "path": str(tmp_path / "t.json")}})
    report = run_threshold(cfg)
    path = ReportService(cfg).write(report)
    payload = json.loads(path.read_text(encoding="utf-8"))
    assert payload["header"]["command"] == "threshold"
    assert payload["header"]["failures"] == 0
    assert len(payload["rows"]) == len(report.frame)
    assert payload["rows"][0]["alpha"] is not None


def test_same_config_writes_identical_bytes(tmp_path):
    cfg = ScenarioConfig.from_dict(
        {"n": 2, "function": {"kind": "power-perturbed", "beta": 0.1}, "control": {"r": 2.0},
         "grid": {"min": -1.0, "max": 1.0, "count": 3}, "sampling": {"additivity_samples": 4}}
    )
    first = ReportService(cfg).write(run_approx(cfg), tmp_path / "first.csv")
    second = ReportService(cfg).write(run_approx(cfg), tmp_path / "second.csv")
    assert first.read_bytes() == second.read_bytes()
