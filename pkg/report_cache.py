"""Append-only JSON-lines store of per-pair reports.

Each line is ``{"schema": 2, "d1": .., "d2": .., "mode": .., "record": {...}}``.
Lines with another schema version, or that fail to decode, are skipped. Only
the process that owns a ReportCache writes to it.
"""
from __future__ import annotations

import json
import logging
import threading
from pathlib import Path
from typing import Optional

from utils import CACHE_HITS

SCHEMA_VERSION = 2

CacheKey = tuple[int, int, str]


def _deserialize_line(raw: str) -> Optional[tuple[CacheKey, dict]]:
    try:
        entry = json.loads(raw)
    except json.JSONDecodeError:
        return None
    if not isinstance(entry, dict) or entry.get("schema") != SCHEMA_VERSION:
        return None
    d1, d2, mode, record = entry.get("d1"), entry.get("d2"), entry.get("mode"), entry.get("record")
    if not isinstance(d1, int) or not isinstance(d2, int) or not isinstance(mode, str):
        return None
    if not isinstance(record, dict):
        return None
    return (d1, d2, mode), record


class ReportCache:
    def __init__(self, path: str | Path, enabled: bool = True):
        self.path = Path(path)
        self.enabled = enabled
        self._lock = threading.Lock()
        self._entries: Optional[dict[CacheKey, dict]] = None

    def _load(self) -> dict[CacheKey, dict]:
        entries: dict[CacheKey, dict] = {}
        try:
            if not self.path.exists():
                return entries
            lines = self.path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            logging.warning("Failed to read report cache from %s: %s", self.path, exc)
            return entries

        skipped = 0
        for line in lines:
            if not line.strip():
                continue
            parsed = _deserialize_line(line)
            if parsed is None:
                skipped += 1
                continue
            key, record = parsed
            entries[key] = record
        if skipped:
            logging.warning("Skipped %d unreadable lines in report cache %s", skipped, self.path)
        return entries

    def _index(self) -> dict[CacheKey, dict]:
        if self._entries is None:
            self._entries = self._load()
        return self._entries

    def get(self, d1: int, d2: int, mode: str) -> Optional[dict]:
        if not self.enabled:
            return None
        with self._lock:
            record = self._index().get((d1, d2, mode))
        if record is not None:
            CACHE_HITS.inc()
            logging.debug({"event": "cache_hit", "d1": d1, "d2": d2, "mode": mode})
        return record

    def put(self, d1: int, d2: int, mode: str, record: dict) -> None:
        if not self.enabled:
            return
        line = json.dumps(
            {"schema": SCHEMA_VERSION, "d1": d1, "d2": d2, "mode": mode, "record": record},
            ensure_ascii=False,
            sort_keys=True,
        )
        with self._lock:
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as f:
                    f.write(line + "\n")
            except OSError as exc:
                logging.warning("Failed to append to report cache %s: %s", self.path, exc)
                return
            self._index()[(d1, d2, mode)] = record
        logging.debug({"event": "cache_append", "d1": d1, "d2": d2, "mode": mode})

    def __len__(self) -> int:
        with self._lock:
            return len(self._index())
