"""Experiment reports and their CSV/JSON emission."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path


def _clean(value):
    # JSON has no NaN/Inf; keep them visible as strings
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return _clean(value.item())
    return value


@dataclass
class Report:
    name: str
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    fields: list = field(default_factory=list)

    def check(self, label: str, passed: bool, value=None, budget=None) -> None:
        self.checks[label] = {"passed": bool(passed), "value": value, "budget": budget}

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def columns(self) -> list[str]:
        cols: list[str] = list(self.fields)
        for row in self.rows:
            cols.extend(k for k in row if k not in cols)
        return cols

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.columns(), lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
        return buf.getvalue()

    def json_text(self) -> str:
        data = {
            "experiment": self.name,
            "passed": self.passed,
            "checks": self.checks,
            "summary": self.summary,
            "config": self.config,
        }
        return json.dumps(_clean(data), sort_keys=True, indent=2) + "\n"


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(_fmt(v) for v in value)
    if hasattr(value, "item"):
        return _fmt(value.item())
    return str(value)


def emit(report: Report, path) -> tuple[Path, Path]:
    """Write ``<name>.csv`` and ``<name>.json`` into directory ``path``."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out / f"{report.name}.csv", out / f"{report.name}.json"
    csv_path.write_text(report.csv_text())
    json_path.write_text(report.json_text())
    return csv_path, json_path
