# --------------------------------------------------
# commands/constants_commands.py
# --------------------------------------------------
from pathlib import Path
from typing import Optional

from commands import options
from commands.runner import execute
from services.scenario_service import run_constants


def constants(
    config: Optional[Path] = options.CONFIG,
    eps: Optional[float] = options.EPS,
    kmax: Optional[int] = options.KMAX,
    out: Optional[Path] = options.OUT,
    fmt: Optional[str] = options.FORMAT,
) -> None:
    """Tabulate kappa(n, r) and C(n, r) next to the printed closed forms."""
    overrides = options.build_overrides(eps=eps, kmax=kmax, out=out, fmt=fmt)
    execute("constants", config, overrides, run_constants)
