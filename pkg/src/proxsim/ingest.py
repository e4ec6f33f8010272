"""Merge scattered simulator log files into a training set.

Each CSV carries key column(s) plus mapped input/output columns; rows are
inner-joined on the key across all files, mapped onto domain variables,
encoded, and reported. Join order and file row order never affect the
result: rows land in sorted key order.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domain import DomainOfApplicability, TrainingSet
from .errors import (
    KeyCollision,
    MissingColumn,
    MissingFile,
    OutOfDomain,
    UnknownLevel,
    UnknownVariable,
    UnmappableValue,
)


@dataclass(frozen=True)
class LogFileSpec:
    path: str
    role: str  # inputs | outputs | mixed; informational
    key: tuple[str, ...]
    columns: dict[str, str]  # csv column -> domain variable name


@dataclass(frozen=True)
class LogSchema:
    files: tuple[LogFileSpec, ...]
    levels: dict[str, dict[str, str]] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "LogSchema":
        files = tuple(
            LogFileSpec(
                path=f["path"],
                role=f.get("role", "mixed"),
                key=tuple(f["key"]) if isinstance(f["key"], (list, tuple)) else (f["key"],),
                columns=dict(f["columns"]),
            )
            for f in d["files"]
        )
        return cls(files=files, levels={k: dict(v) for k, v in d.get("levels", {}).items()})


@dataclass
class IngestReport:
    """What was read, what joined, and what fell out (and why)."""

    rows_read: dict[str, int] = field(default_factory=dict)
    rows_joined: int = 0
    dropped: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_joined": self.rows_joined,
            "rows_dropped": len(self.dropped),
            "dropped": self.dropped,
        }


def load_log_schema(path: str | Path) -> tuple[LogSchema, DomainOfApplicability]:
    """Read a schema file: {files, levels, domain}."""
    doc = json.loads(Path(path).read_text())
    return LogSchema.from_dict(doc), DomainOfApplicability.from_dict(doc["domain"])


def _read_keyed(spec: LogFileSpec, base_dir: Path, report: IngestReport) -> dict[tuple, dict]:
    path = base_dir / spec.path
    if not path.exists():
        raise MissingFile(f"log file {path} does not exist")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in list(spec.key) + list(spec.columns):
            if col not in header:
                raise MissingColumn(f"{spec.path}: column {col!r} not in header {header}")
        rows: dict[tuple, dict] = {}
        count = 0
        for row in reader:
            count += 1
            key = tuple(row[k] for k in spec.key)
            if key in rows:
                raise KeyCollision(f"{spec.path}: duplicate key {key}")
            rows[key] = {var: row[col] for col, var in spec.columns.items()}
    report.rows_read[spec.path] = count
    return rows


def ingest_logs(
    schema: LogSchema, domain: DomainOfApplicability, *, base_dir: str | Path = "."
) -> tuple[TrainingSet, IngestReport]:
    """Join the schema's files on their keys and encode a training set.

    Unmatched keys are dropped and reported; duplicate keys, missing
    columns and unmappable cell values are errors.
    """
    base = Path(base_dir)
    report = IngestReport()
    tables = [(spec, _read_keyed(spec, base, report)) for spec in schema.files]

    key_sets = [set(rows) for _, rows in tables]
    joined_keys = set.intersection(*key_sets) if key_sets else set()
    for spec, rows in tables:
        for key in sorted(set(rows) - joined_keys):
            report.dropped.append(
                {"key": list(key), "file": spec.path, "reason": "unmatched_key"}
            )

    input_names = set(domain.input_names)
    output_names = list(domain.output_names)
    X_rows, Y_rows = [], []
    for key in sorted(joined_keys):
        merged: dict[str, str] = {}
        for _, rows in tables:
            merged.update(rows[key])
        missing = (input_names | set(output_names)) - set(merged)
        if missing:
            raise MissingColumn(f"no column mapped to variable(s) {sorted(missing)}")
        point = {}
        for name in domain.input_names:
            raw = merged[name]
            level_map = schema.levels.get(name)
            if level_map is not None:
                if raw not in level_map:
                    raise UnmappableValue(list(key), name,
                                          f"row {list(key)}: value {raw!r} not in level map of {name!r}")
                point[name] = level_map[raw]
            else:
                try:
                    point[name] = float(raw)
                except ValueError:
                    raise UnmappableValue(list(key), name,
                                          f"row {list(key)}: {raw!r} is not numeric")
        try:
            x = domain.encode(point)
        except (OutOfDomain, UnknownLevel, UnknownVariable) as exc:
            raise UnmappableValue(list(key), getattr(exc, "variable", "?"), str(exc))
        y = []
        for name in output_names:
            try:
                y.append(float(merged[name]))
            except ValueError:
                raise UnmappableValue(list(key), name,
                                      f"row {list(key)}: {merged[name]!r} is not numeric")
        X_rows.append(x)
        Y_rows.append(y)

    report.rows_joined = len(X_rows)
    X = np.array(X_rows) if X_rows else np.zeros((0, domain.encoded_dim))
    Y = np.array(Y_rows) if Y_rows else np.zeros((0, len(output_names)))
    return TrainingSet(domain, X, Y), report
