"""Deterministic report serialization.

CSV files carry a header row, UTF-8 text, LF line endings, and floats in
shortest round-trip decimal form; JSON files use sorted keys. Identical
configs and seeds must reproduce byte-identical files, so volatile data
(wall time) stays out of the serialized payload.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["ExperimentReport", "config_hash", "write_csv", "write_json", "emit_report"]


def _plain(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def config_hash(config: dict) -> str:
    canonical = json.dumps(_plain(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(eq=False)
class ExperimentReport:
    experiment: str
    columns: list[str]
    rows: list[dict]
    metadata: dict = field(default_factory=dict)
    wall_time_s: float | None = None  # informational only, never serialized

    @property
    def passed(self) -> bool:
        return all(bool(row.get("pass", True)) for row in self.rows)


def _cell(value) -> str:
    value = _plain(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_csv(report: ExperimentReport, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([_cell(row.get(col)) for col in report.columns])
    return path


def write_json(report: ExperimentReport, path) -> Path:
    path = Path(path)
    payload = {
        "experiment": report.experiment,
        "metadata": _plain(report.metadata),
        "columns": list(report.columns),
        "rows": [{k: _plain(v) for k, v in row.items()} for row in report.rows],
        "passed": report.passed,
    }
    text = json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def emit_report(report: ExperimentReport, out_dir, formats=("csv", "json")) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    writers = {"csv": write_csv, "json": write_json}
    paths = []
    for fmt in formats:
        if fmt not in writers:
            raise ValueError(f"unknown report format {fmt!r}")
        paths.append(writers[fmt](report, out_dir / f"{report.experiment}.{fmt}"))
    return paths
