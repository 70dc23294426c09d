import numpy as np
import pandas as pd
import pytest

from models.control_spec import ControlSpec, Power
from models.scenario_config import ScenarioConfig
from models.symmetric_spec import PowerPerturbed, SymmetricSpec


@pytest.fixture(autouse=True)
def output_dir(tmp_path, monkeypatch):
    """Keep every report inside the test's temp dir."""
    out = tmp_path / "reports"
    monkeypatch.setenv("HYERS_LAB_OUTPUT_DIR", str(out))
    return out


@pytest.fixture
def read_report():
    """Load a CSV report back, skipping its `# key: value` header lines."""
    return lambda path: pd.read_csv(path, comment="#")


@pytest.fixture
def perturbed_plus():
    """g = x_1 x_2 + 0.1 |x_1|^0.5 |x_2|^0.5 with its control."""
    spec = SymmetricSpec(n=2, kind=PowerPerturbed(c=1.0, beta=0.1, r=0.5))
    control = ControlSpec(n=2, kind=Power(eps=1.0, r=0.5))
    return spec, control


@pytest.fixture
def perturbed_minus():
    spec = SymmetricSpec(n=2, kind=PowerPerturbed(c=1.0, beta=0.1, r=2.0))
    control = ControlSpec(n=2, kind=Power(eps=1.0, r=2.0))
    return spec, control


@pytest.fixture
def approx_config():
    def build(r: float, offsets=(0,)) -> ScenarioConfig:
        return ScenarioConfig.from_dict(
            {
                "n": 2,
                "function": {"kind": "power-perturbed", "c": 1.0, "beta": 0.1},
                "control": {"eps": 1.0, "r": r},
                "grid": {"min": -4.0, "max": 4.0, "count": 9},
                "iteration": {"offsets": list(offsets)},
            }
        )

    return build


def points(*values):
    return tuple(np.array([v], dtype=float) for v in values)
