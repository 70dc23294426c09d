# --------------------------------------------------
# commands/options.py
# --------------------------------------------------
# Flags shared by every report command. Each flag maps onto one dotted
# config key; unset flags leave the config file value alone.
from pathlib import Path
from typing import Any, Dict, Optional

import typer

CONFIG = typer.Option(None, "--config", "-c", help="YAML scenario file; flags override its values")
N = typer.Option(None, "--n", help="Arity n of the symmetric map")
D = typer.Option(None, "--d", help="Dimension d of each point")
EPS = typer.Option(None, "--eps", help="Control scale eps")
R = typer.Option(None, "--r", help="Control exponent r")
DELTA = typer.Option(None, "--delta", help="Approximation radius delta (threshold)")
GRID = typer.Option(None, "--grid", help="Per-axis grid as min:max:count, e.g. -4:4:9")
SAMPLES = typer.Option(None, "--samples", help="Number of random samples")
SEED = typer.Option(None, "--seed", help="PRNG seed (default 0x5EED)")
KMAX = typer.Option(None, "--kmax", help="Iteration cap k_max")
TOL = typer.Option(None, "--tol", help="Stopping tolerance on the remaining tail")
OUT = typer.Option(None, "--out", "-o", help="Report path (default $HYERS_LAB_OUTPUT_DIR/<command>.<format>)")
FORMAT = typer.Option(None, "--format", help="Report format: csv or json")
KIND = typer.Option(None, "--kind", help="Function kind: exact, power-perturbed, abs-product, gajda-multi")
C = typer.Option(None, "--c", help="Coefficient c of the exact part")
BETA = typer.Option(None, "--beta", help="Perturbation size beta")
WORKERS = typer.Option(None, "--workers", help="Process-pool size for grid evaluation")


def parse_grid(text: Optional[str]) -> Dict[str, Any]:
    """'min:max:count' -> grid overrides."""
    if text is None:
        return {}
    parts = text.split(":")
    if len(parts) != 3:
        raise typer.BadParameter(f"expected min:max:count, got '{text}'", param_hint="--grid")
    try:
        low, high, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise typer.BadParameter(f"could not read numbers from '{text}'", param_hint="--grid")
    return {"grid.min": low, "grid.max": high, "grid.count": count}


def build_overrides(
    n: Optional[int] = None,
    d: Optional[int] = None,
    eps: Optional[float] = None,
    r: Optional[float] = None,
    delta: Optional[float] = None,
    grid: Optional[str] = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    kmax: Optional[int] = None,
    tol: Optional[float] = None,
    out: Optional[Path] = None,
    fmt: Optional[str] = None,
    kind: Optional[str] = None,
    c: Optional[float] = None,
    beta: Optional[float] = None,
    workers: Optional[int] = None,
    **extra: Any,
) -> Dict[str, Any]:
    overrides = {
        "n": n,
        "d": d,
        "control.eps": eps,
        "control.r": r,
        "threshold.delta": delta,
        "sampling.samples": samples,
        "sampling.seed": seed,
        "iteration.k_max": kmax,
        "iteration.tol": tol,
        "output.path": str(out) if out is not None else None,
        "output.format": fmt,
        "function.kind": kind,
        "function.c": c,
        "function.beta": beta,
        "workers": workers,
    }
    overrides.update(parse_grid(grid))
    overrides.update(extra)
    return overrides
