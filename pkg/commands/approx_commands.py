# --------------------------------------------------
# commands/approx_commands.py
# --------------------------------------------------
from pathlib import Path
from typing import List, Optional

import typer

from commands import options
from commands.runner import execute
from services.scenario_service import run_approx


def approx(
    config: Optional[Path] = options.CONFIG,
    n: Optional[int] = options.N,
    d: Optional[int] = options.D,
    kind: Optional[str] = options.KIND,
    c: Optional[float] = options.C,
    beta: Optional[float] = options.BETA,
    eps: Optional[float] = options.EPS,
    r: Optional[float] = options.R,
    grid: Optional[str] = options.GRID,
    samples: Optional[int] = options.SAMPLES,
    seed: Optional[int] = options.SEED,
    kmax: Optional[int] = options.KMAX,
    tol: Optional[float] = options.TOL,
    offset: Optional[List[int]] = typer.Option(None, "--offset", help="Start offset k_0; repeat to compare several"),
    workers: Optional[int] = options.WORKERS,
    out: Optional[Path] = options.OUT,
    fmt: Optional[str] = options.FORMAT,
) -> None:
    """Approximate g on a grid; plus mode for r < 1, minus mode for r > 1."""
    overrides = options.build_overrides(
        n=n, d=d, kind=kind, c=c, beta=beta, eps=eps, r=r, grid=grid, samples=samples, seed=seed,
        kmax=kmax, tol=tol, workers=workers, out=out, fmt=fmt,
    )
    if offset:
        overrides["iteration.offsets"] = list(offset)
    execute("approx", config, overrides, run_approx)
