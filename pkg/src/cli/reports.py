"""
RUN REPORTS
===========
report.json: sorted keys, no timestamps, every inequality with measured
value, bound and margin. summary.txt: the same checks as a rich table.
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
from loguru import logger
from rich.console import Console
from rich.table import Table

from src.errors import InputError
from src.verification import CheckLedger

REPORT_FILE = "report.json"
SUMMARY_FILE = "summary.txt"
VERIFY_FILE = "verification.json"


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def dump_json(path: Path, record: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, sort_keys=True, indent=2, default=_jsonable) + "\n")
    return path


def checks_table(title: str, ledger: CheckLedger) -> Table:
    table = Table(title=title)
    table.add_column("check", overflow="fold")
    table.add_column("measured", justify="right")
    table.add_column("bound", justify="right")
    table.add_column("margin", justify="right")
    table.add_column("", justify="center")
    for check in ledger:
        table.add_row(
            check.name,
            f"{check.measured:.6g}",
            f"{check.bound:.6g}",
            f"{check.margin:.3g}",
            "✅" if check.passed else "❌",
        )
    return table


def write_report(
    out_dir: Path,
    command: str,
    config: Dict[str, Any],
    results: Dict[str, Any],
    ledger: CheckLedger,
    artifacts: Dict[str, str],
    console: Optional[Console] = None,
) -> Path:
    """Write report.json and summary.txt; print the summary table"""
    record = {
        "command": command,
        "config": config,
        "results": results,
        "checks": ledger.as_records(),
        "passed": ledger.passed,
        "artifacts": artifacts,
    }
    path = dump_json(out_dir / REPORT_FILE, record)

    console = console or Console(record=True, width=120)
    console.print(checks_table(f"{command}: {len(ledger)} checks", ledger))
    if ledger.passed:
        console.print(f"all {len(ledger)} checks passed")
    else:
        console.print(f"first violated: {ledger.failures[0].describe()}")
    (out_dir / SUMMARY_FILE).write_text(console.export_text())
    logger.info(f"📄 Report written to {path}")
    return path


def read_report(out_dir: Path) -> Dict[str, Any]:
    path = Path(out_dir) / REPORT_FILE
    if not path.exists():
        raise InputError("no report found (run a command first)", path=str(path))
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"malformed report: {e.msg}", path=str(path), line=e.lineno) from e
