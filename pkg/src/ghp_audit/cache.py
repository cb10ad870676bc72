"""Append-only observation cache keyed by (check kind, target, endpoint).

Every external observation is one JSON line in ``observations.jsonl``. A later
line with the same key supersedes an earlier one (only used when re-fetching
Unknown outcomes); lines are never rewritten.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

log = logging.getLogger(__name__)

KINDS = ("liveness", "swh_origin", "swh_visits", "sf_project", "timemap")


def cache_key(kind: str, target: str, endpoint: str | None = None) -> str:
    if kind not in KINDS:
        raise ValueError(f"unknown check kind {kind!r}")
    blob = json.dumps([kind, target, endpoint], separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class ObservationCache:
    def __init__(self, directory: str | Path | None = None):
        self.path = Path(directory) / "observations.jsonl" if directory is not None else None
        self._entries: dict[str, dict] = {}
        self._write_lock = threading.Lock()
        self._key_locks: dict[str, threading.Lock] = {}
        self._locks_lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        with self.path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError:
                    # a torn final line from an interrupted run
                    log.warning("%s:%d: skipping unreadable cache line", self.path, lineno)
                    continue
                self._entries[entry["key"]] = entry

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, kind: str, target: str, endpoint: str | None = None) -> dict | None:
        entry = self._entries.get(cache_key(kind, target, endpoint))
        return entry["payload"] if entry else None

    def put(self, kind: str, target: str, endpoint: str | None, payload: Any) -> None:
        key = cache_key(kind, target, endpoint)
        entry = {
            "key": key,
            "kind": kind,
            "target": target,
            "endpoint": endpoint,
            "fetched_at": datetime.now(timezone.utc).replace(microsecond=0).isoformat(),
            "payload": payload,
        }
        line = json.dumps(entry, sort_keys=True, ensure_ascii=False)
        with self._write_lock:
            if self.path is not None:
                with self.path.open("a", encoding="utf-8", newline="\n") as fh:
                    fh.write(line + "\n")
            self._entries[key] = json.loads(line)

    def _lock_for(self, key: str) -> threading.Lock:
        with self._locks_lock:
            return self._key_locks.setdefault(key, threading.Lock())

    def fetch(self, kind: str, target: str, endpoint: str | None, producer: Callable[[], Any],
              stale: Callable[[Any], bool] | None = None) -> Any:
        """Return the cached payload, or run ``producer`` and record its result.

        ``stale(payload)`` true forces a re-fetch of a cached observation.
        """
        key = cache_key(kind, target, endpoint)
        with self._lock_for(key):
            entry = self._entries.get(key)
            if entry is not None and not (stale and stale(entry["payload"])):
                self.hits += 1
                return entry["payload"]
            self.misses += 1
            payload = producer()
            self.put(kind, target, endpoint, payload)
            return self._entries[key]["payload"]
