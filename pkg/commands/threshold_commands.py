# --------------------------------------------------
# commands/threshold_commands.py
# --------------------------------------------------
from pathlib import Path
from typing import Optional

from commands import options
from commands.runner import execute
from services.scenario_service import run_threshold


def threshold(
    config: Optional[Path] = options.CONFIG,
    n: Optional[int] = options.N,
    eps: Optional[float] = options.EPS,
    delta: Optional[float] = options.DELTA,
    grid: Optional[str] = options.GRID,
    samples: Optional[int] = options.SAMPLES,
    seed: Optional[int] = options.SEED,
    out: Optional[Path] = options.OUT,
    fmt: Optional[str] = options.FORMAT,
) -> None:
    """Counterexamples at r = 1: approximant family, defect bounds and witnesses."""
    overrides = options.build_overrides(
        n=n, eps=eps, delta=delta, grid=grid, samples=samples, seed=seed, out=out, fmt=fmt
    )
    execute("threshold", config, overrides, run_threshold)
