# --------------------------------------------------
# commands/runner.py
# --------------------------------------------------
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import typer
from rich.console import Console

from models.scenario_config import ScenarioConfig
from services.report_service import CommandReport, ReportService
from utils.errors import HyersLabError
from utils.logger import get_logger

log = get_logger("cli")
console = Console(stderr=True)

EXIT_FAILED_ROWS = 1
EXIT_USAGE = 2


def execute(
    command: str,
    config: Optional[Path],
    overrides: Dict[str, Any],
    service: Callable[[ScenarioConfig], CommandReport],
    show: Optional[Callable[[CommandReport], None]] = None,
) -> None:
    """Load the scenario, run the service, write the report and set the exit code."""
    try:
        cfg = ScenarioConfig.load(config, overrides)
        report = service(cfg)
        path = ReportService(cfg).write(report)
    except HyersLabError as e:
        log.error("⚠️ %s", e)
        raise typer.Exit(code=EXIT_USAGE)

    if show is not None:
        show(report)
    for flag in report.flags:
        log.warning("⚠️ flag: %s", flag)
    typer.echo(str(path))
    if not report.passed:
        log.warning("⚠️ %s: %s", command, report.summary)
        raise typer.Exit(code=EXIT_FAILED_ROWS)
    log.info("✅ %s: %s", command, report.summary)
