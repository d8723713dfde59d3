"""Report assembly and deterministic CSV/JSON emission.

Reports are byte-stable: fixed column orders, floats printed with 17
significant digits (shortest exact round trip for doubles), sorted JSON
keys, and no timestamps or environment echoes.  Running the same config
twice must produce identical bytes.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = ["CriterionResult", "ExperimentReport", "emit_report",
           "format_value"]

REPORT_SCHEMA_VERSION = 1


def format_value(x) -> str:
    """CSV cell formatting: 17 significant digits for floats."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


@dataclass
class CriterionResult:
    """One acceptance criterion: a value against a bound."""

    name: str
    value: float
    bound: float
    op: str = "<="   # value op bound must hold

    @property
    def passed(self) -> bool:
        if self.op == "<=":
            return bool(self.value <= self.bound)
        if self.op == ">=":
            return bool(self.value >= self.bound)
        raise ValueError(f"unknown comparison {self.op!r}")

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: value={self.value:.6g} "
                f"{self.op} bound={self.bound:.6g}")


@dataclass
class ExperimentReport:
    experiment: str
    columns: tuple
    rows: list = field(default_factory=list)
    criteria: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def add_row(self, *cells) -> None:
        if len(cells) != len(self.columns):
            raise ValueError("row width does not match the declared columns")
        self.rows.append(tuple(cells))

    def add_criterion(self, name: str, value: float, bound: float,
                      op: str = "<=") -> CriterionResult:
        res = CriterionResult(name=name, value=float(value),
                              bound=float(bound), op=op)
        self.criteria.append(res)
        return res

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.criteria)


def emit_report(report: ExperimentReport, out_dir: str) -> tuple:
    """Write <experiment>.csv and <experiment>.json; returns the two paths."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{report.experiment}.csv")
    json_path = os.path.join(out_dir, f"{report.experiment}.json")
    lines = [",".join(report.columns)]
    for row in report.rows:
        lines.append(",".join(format_value(c) for c in row))
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    doc = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "experiment": report.experiment,
        "criteria": [
            {"name": c.name, "value": c.value, "bound": c.bound,
             "comparison": c.op, "passed": c.passed}
            for c in report.criteria
        ],
        "all_passed": report.all_passed,
        "summary": _jsonable(report.summary),
    }
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path
