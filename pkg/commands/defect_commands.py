# --------------------------------------------------
# commands/defect_commands.py
# --------------------------------------------------
from pathlib import Path
from typing import Optional

from commands import options
from commands.runner import execute
from services.scenario_service import run_defect


def defect(
    config: Optional[Path] = options.CONFIG,
    n: Optional[int] = options.N,
    d: Optional[int] = options.D,
    kind: Optional[str] = options.KIND,
    c: Optional[float] = options.C,
    beta: Optional[float] = options.BETA,
    eps: Optional[float] = options.EPS,
    r: Optional[float] = options.R,
    samples: Optional[int] = options.SAMPLES,
    seed: Optional[int] = options.SEED,
    out: Optional[Path] = options.OUT,
    fmt: Optional[str] = options.FORMAT,
) -> None:
    """Sample z and check |D_n g(z)| <= phi(z)."""
    overrides = options.build_overrides(
        n=n, d=d, kind=kind, c=c, beta=beta, eps=eps, r=r, samples=samples, seed=seed, out=out, fmt=fmt
    )
    execute("defect", config, overrides, run_defect)
