# --------------------------------------------------
# commands/selftest_commands.py
# --------------------------------------------------
from pathlib import Path
from typing import Optional

import typer
from rich import box
from rich.table import Table

from commands import options
from commands.runner import console, execute
from services.report_service import CommandReport
from services.selftest_service import run_selftest


def _print_invariants(report: CommandReport) -> None:
    table = Table(title="hyers-lab selftest", box=box.SIMPLE_HEAVY)
    for column in ("suite", "invariant", "checked", "failures", "status"):
        table.add_column(column, justify="right" if column in ("checked", "failures") else "left")
    for row in report.frame.itertuples(index=False):
        status = "[green]PASS[/green]" if row.passed else "[red]FAIL[/red]"
        table.add_row(row.suite, row.invariant, str(row.checked), str(row.failures), status)
    console.print(table)


def selftest(
    config: Optional[Path] = options.CONFIG,
    seed: Optional[int] = options.SEED,
    inject_fault: Optional[str] = typer.Option(
        None, "--inject-fault", help="Swap in a known-bad component, e.g. zeta-literal-branch"
    ),
    out: Optional[Path] = options.OUT,
    fmt: Optional[str] = options.FORMAT,
) -> None:
    """Run the invariant suites of both modules with fixed seeds."""
    overrides = options.build_overrides(seed=seed, out=out, fmt=fmt)
    execute(
        "selftest",
        config,
        overrides,
        lambda cfg: run_selftest(seed=cfg.sampling.seed, fault=inject_fault),
        show=_print_invariants,
    )
