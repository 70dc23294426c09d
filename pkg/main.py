# --------------------------------------------------
# main.py
# --------------------------------------------------
from typing import Optional

import typer
from dotenv import load_dotenv

from services.report_service import TOOL_NAME, TOOL_VERSION
from utils.logger import configure_logging, get_logger

load_dotenv()

# --------------------------------------------------
# Initialize Typer
# --------------------------------------------------
app = typer.Typer(
    name=TOOL_NAME,
    help="Hyers-Ulam-Rassias stability lab for symmetric n-additive maps.",
    no_args_is_help=True,
    add_completion=False,
)
log = get_logger("main")


@app.callback()
def _root(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING or ERROR (default $HYERS_LAB_LOG_LEVEL)"),
) -> None:
    configure_logging(log_level)
    log.debug("🟢 %s %s started", TOOL_NAME, TOOL_VERSION)


# --------------------------------------------------
# Defect sampling
# --------------------------------------------------
from commands.defect_commands import defect  # noqa: E402

app.command("defect")(defect)

# --------------------------------------------------
# Approximation on a grid
# --------------------------------------------------
from commands.approx_commands import approx  # noqa: E402

app.command("approx")(approx)

# --------------------------------------------------
# Power-control constants
# --------------------------------------------------
from commands.constants_commands import constants  # noqa: E402

app.command("constants")(constants)

# --------------------------------------------------
# Threshold counterexamples
# --------------------------------------------------
from commands.threshold_commands import threshold  # noqa: E402

app.command("threshold")(threshold)

# --------------------------------------------------
# Invariant self-test
# --------------------------------------------------
from commands.selftest_commands import selftest  # noqa: E402

app.command("selftest")(selftest)


if __name__ == "__main__":
    app()
