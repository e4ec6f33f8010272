"""Append-only campaign journal: one JSON object per line.

Events: init, fit, acquire, simulate, metrics, stop, warning. Records carry
no timestamps or other machine-local state, so identical campaigns produce
byte-identical journals and a journal can be replayed into a live campaign.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .errors import CorruptJournal

EVENTS = ("init", "fit", "acquire", "simulate", "metrics", "stop", "warning")


def dump_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


class JournalWriter:
    """Line-buffered appender; flushes after every record."""

    def __init__(self, path: str | Path, append: bool = False):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "a" if append else "w", encoding="utf-8")

    def write(self, record: dict) -> None:
        if record.get("event") not in EVENTS:
            raise ValueError(f"unknown journal event {record.get('event')!r}")
        self._fh.write(dump_record(record))
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_journal(path: str | Path) -> list[dict]:
    """Parse a journal file strictly; any malformed line is a CorruptJournal."""
    path = Path(path)
    if not path.exists():
        raise CorruptJournal(f"journal {path} does not exist")
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptJournal(f"{path}:{lineno}: {exc}")
            if not isinstance(rec, dict) or rec.get("event") not in EVENTS:
                raise CorruptJournal(f"{path}:{lineno}: not a journal record")
            records.append(rec)
    if not records:
        raise CorruptJournal(f"journal {path} is empty")
    if records[0]["event"] != "init":
        raise CorruptJournal(f"journal {path} does not start with an init record")
    return records
