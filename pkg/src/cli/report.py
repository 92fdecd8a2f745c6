"""
Report model and its JSON / CSV emitters.

JSON output is deterministic: keys are sorted, floats use their shortest
round-trip repr, and the volatile fields (version, timestamp, duration) live
under ``meta``.
"""

import csv
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from config.logger import setup_logger
from utils.errors import InvalidInputError, NonFiniteValuesError, ReportIOError

logger = setup_logger(__name__)


@dataclass
class Table:
    """Rectangular table of report rows."""

    name: str
    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)

    def __post_init__(self):
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise InvalidInputError(
                    f"Row {i} of table '{self.name}' has {len(row)} cells, "
                    f"expected {len(self.columns)}."
                )

    def add_row(self, row: Sequence[Any]) -> None:
        if len(row) != len(self.columns):
            raise InvalidInputError(
                f"Row for table '{self.name}' has {len(row)} cells, expected {len(self.columns)}."
            )
        self.rows.append(list(row))

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": [list(r) for r in self.rows]}


@dataclass
class Report:
    """
    Result of one subcommand.

    Attributes:
        command: Subcommand name.
        inputs: Resolved inputs (parameters, grids, evolution settings).
        outputs: Scalar and small structured results.
        tolerances: Tolerances in force for the run.
        checks: name -> {"value", "limit", "passed"} for each assertion.
        tables: Tables emitted in the JSON and, the first one, as CSV.
        meta: Version, timestamp and duration; excluded from comparisons.
    """

    command: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    outputs: Dict[str, Any] = field(default_factory=dict)
    tolerances: Dict[str, float] = field(default_factory=dict)
    checks: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    tables: List[Table] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)

    def check(self, name: str, value: float, limit: float) -> bool:
        """Records the assertion value <= limit."""
        passed = bool(math.isfinite(value) and value <= limit)
        self.checks[name] = {"value": float(value), "limit": float(limit), "passed": passed}
        if not passed:
            logger.warning("Check %s failed: %.6g > %.6g", name, value, limit)
        return passed

    def flag(self, name: str, passed: bool) -> bool:
        """Records a boolean assertion."""
        self.checks[name] = {"passed": bool(passed)}
        if not passed:
            logger.warning("Check %s failed", name)
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(entry["passed"] for entry in self.checks.values())

    def primary_table(self) -> Table:
        """The first table, or the scalar outputs as a name/value table."""
        if self.tables:
            return self.tables[0]
        scalars = Table("outputs", ["name", "value"])
        for key, value in sorted(self.outputs.items()):
            if isinstance(value, (int, float, str, bool)) or value is None:
                scalars.add_row([key, value])
        return scalars

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "tolerances": self.tolerances,
            "checks": self.checks,
            "passed": self.passed,
            "tables": {table.name: table.to_dict() for table in self.tables},
            "meta": self.meta,
        }


def dumps(body: dict) -> str:
    """Canonical JSON text of a report body."""
    try:
        return json.dumps(body, sort_keys=True, indent=2, allow_nan=False) + "\n"
    except ValueError as e:
        logger.error("Report holds a non-finite number: %s", e)
        raise NonFiniteValuesError(f"Report holds a non-finite number: {e}") from e


def emit_json(report: Report, path: Optional[str] = None) -> str:
    """
    Writes the report as JSON to ``path`` or to stdout.

    Returns:
        str: The emitted text.
    """
    text = dumps(report.to_dict())
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return text
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        logger.error("Cannot write report to %s: %s", path, e)
        raise ReportIOError(f"Cannot write report to {path}: {e}") from e
    logger.info("Report written to %s", path)
    return text


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(table: Table, path: str) -> None:
    """
    Writes a table as RFC 4180 CSV with a header row and LF line endings.

    Args:
        table: Rectangular table.
        path: Output file.
    """
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table.columns)
            writer.writerows([_cell(v) for v in row] for row in table.rows)
    except OSError as e:
        logger.error("Cannot write CSV to %s: %s", path, e)
        raise ReportIOError(f"Cannot write CSV to {path}: {e}") from e
    logger.info("CSV table '%s' with %d rows written to %s", table.name, len(table.rows), path)
