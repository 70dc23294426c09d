# services/report_service.py

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from models.scenario_config import ScenarioConfig
from utils.digest import digest_manager
from utils.logger import get_logger
from utils.sampling import PRNG_NAME

log = get_logger("reports")

TOOL_NAME = "hyers-lab"
TOOL_VERSION = "0.1.0"
FLOAT_FORMAT = "%.17g"


@dataclass
class CommandReport:
    """Rows of one command run plus everything its header needs."""

    command: str
    frame: pd.DataFrame
    flags: List[str] = field(default_factory=list)
    failures: int = 0
    summary: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0


def rows_to_frame(rows: List[Dict[str, Any]], columns: List[str]) -> pd.DataFrame:
    """Frame with a fixed column order; missing values stay empty."""
    frame = pd.DataFrame(rows, columns=columns)
    return frame.reset_index(drop=True)


def point_columns(prefix: str, count: int) -> List[str]:
    return [f"{prefix}{i + 1}" for i in range(count)]


def scenario_id(command: str, config: ScenarioConfig) -> str:
    return f"{command}-{config_hash(config)[:8]}"


def config_hash(config: ScenarioConfig) -> str:
    return digest_manager.digest_text(config.to_canonical_yaml())


class ReportService:
    """Writes command reports as CSV (with `# key: value` header lines) or JSON."""

    def __init__(self, config: ScenarioConfig):
        self.config = config

    def header(self, report: CommandReport) -> Dict[str, Any]:
        return {
            "tool": f"{TOOL_NAME} {TOOL_VERSION}",
            "command": report.command,
            "config_hash": config_hash(self.config),
            "seed": self.config.sampling.seed,
            "prng": PRNG_NAME,
            "rows": len(report.frame),
            "failures": report.failures,
            "flags": list(report.flags),
        }

    def default_path(self, command: str) -> Path:
        out_dir = Path(os.getenv("HYERS_LAB_OUTPUT_DIR", "reports"))
        return out_dir / f"{command}.{self.config.output.format}"

    def render(self, report: CommandReport) -> str:
        header = self.header(report)
        if self.config.output.format == "json":
            rows = report.frame.astype(object).where(report.frame.notna(), None).to_dict(orient="records")
            payload = {"header": header, "rows": rows}
            return json.dumps(payload, indent=2, default=_to_native) + "\n"

        lines = []
        for key, value in header.items():
            if key == "flags":
                for flag in value:
                    lines.append(f"# flag: {flag}")
                continue
            lines.append(f"# {key}: {value}")
        body = report.frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return "\n".join(lines) + "\n" + body

    def write(self, report: CommandReport, path: Optional[Path] = None) -> Path:
        target = Path(path or self.config.output.path or self.default_path(report.command))
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(self.render(report), encoding="utf-8")
        log.info("✅ %s report written to %s (%d rows, %d failures)", report.command, target, len(report.frame), report.failures)
        return target


def _to_native(value: Any) -> Any:
    """numpy scalars and paths inside report rows."""
    if hasattr(value, "item"):
        return value.item()
    return str(value)
