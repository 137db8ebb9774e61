"""Append-only result cache: newline-delimited JSON, mergeable and diffable.

Keys canonicalize the group to its invariant factors, so isomorphic
presentations share entries; a hit whose stored presentation differs from the
query keeps the value but drops the witness (its coordinates would be
misleading).  Exact entries are immutable; bound entries are appended only
when tighter.  In-flight computations are deduplicated per key.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .groups import AbelianGroup
from .invariants import InvariantRecord, LengthSpec

__all__ = ["STAMP", "CacheEntry", "ResultCache", "default_cache_path"]

STAMP = "zerosum/0.1.0"

ENV_CACHE = "ZEROSUM_CACHE"


def default_cache_path() -> Path:
    env = os.environ.get(ENV_CACHE)
    if env:
        return Path(env)
    return Path.home() / ".zerosum-cache.ndjson"


def cache_key(group: AbelianGroup, quantity: str, lengths: LengthSpec | None, extra: dict | None = None) -> dict:
    key = {
        "group": list(group.invariant_factors),
        "quantity": quantity,
        "lengths": sorted(lengths.resolve()) if lengths is not None else None,
    }
    if extra:
        key.update(extra)
    return key


@dataclass
class CacheEntry:
    key: dict
    record: dict
    stamp: str
    wall_time: float

    def to_json_dict(self) -> dict:
        return {"key": self.key, "record": self.record, "stamp": self.stamp, "wall_time": self.wall_time}


_inflight_guard = threading.Lock()
_inflight: dict[str, threading.Lock] = {}


class ResultCache:
    def __init__(self, path: Path | str | None, *, enabled: bool = True):
        self.path = Path(path) if path is not None else default_cache_path()
        self.enabled = enabled

    def _entries(self) -> list[CacheEntry]:
        if not self.enabled or not self.path.exists():
            return []
        out = []
        for line in self.path.read_text().splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
                out.append(
                    CacheEntry(
                        key=data["key"],
                        record=data["record"],
                        stamp=data["stamp"],
                        wall_time=float(data["wall_time"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                continue  # tolerate foreign or damaged lines
        return out

    def lookup(self, key: dict) -> CacheEntry | None:
        best: CacheEntry | None = None
        for entry in self._entries():
            if entry.key != key:
                continue
            status = entry.record.get("status")
            if status == "exact":
                return entry
            if best is None:
                best = entry
            else:
                # tighter wins: lower upper bounds, higher lower bounds
                if status == "upper_bound" and entry.record["value"] < best.record["value"]:
                    best = entry
                if status == "lower_bound" and entry.record["value"] > best.record["value"]:
                    best = entry
        return best

    def _append(self, entry: CacheEntry) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        line = json.dumps(entry.to_json_dict(), sort_keys=True) + "\n"
        with open(self.path, "a") as fh:
            try:
                import fcntl

                fcntl.flock(fh, fcntl.LOCK_EX)
                fh.write(line)
                fcntl.flock(fh, fcntl.LOCK_UN)
            except ImportError:
                fh.write(line)

    def store(self, key: dict, record: InvariantRecord, wall_time: float) -> CacheEntry:
        entry = CacheEntry(key=key, record=record.to_json_dict(), stamp=STAMP, wall_time=wall_time)
        if not self.enabled:
            return entry
        existing = self.lookup(key)
        if existing is not None:
            if existing.record.get("status") == "exact":
                return existing  # immutable once exact
            if record.status != "exact":
                old, new = existing.record["value"], record.value
                status = record.status
                tighter = (status == "upper_bound" and new < old) or (
                    status == "lower_bound" and new > old
                )
                if not tighter:
                    return existing
        self._append(entry)
        return entry

    def compute_record(
        self, key: dict, group: AbelianGroup, compute: Callable[[], InvariantRecord]
    ) -> tuple[InvariantRecord, CacheEntry, bool]:
        """Cached record for the key, deduplicating concurrent identical requests.

        Returns (record, entry, from_cache).  A hit stored under an isomorphic
        but differently presented group keeps its value and loses its witness.
        """
        key_text = json.dumps(key, sort_keys=True)
        with _inflight_guard:
            lock = _inflight.setdefault(key_text, threading.Lock())
        with lock:
            hit = self.lookup(key) if self.enabled else None
            if hit is not None:
                record = InvariantRecord.from_json_dict(hit.record)
                if record.group != group:
                    record = InvariantRecord(
                        group=group,
                        quantity=record.quantity,
                        lengths=record.lengths,
                        value=record.value,
                        status=record.status,
                        provenance=record.provenance,
                        witness=None,
                    )
                return record, hit, True
            started = time.perf_counter()
            record = compute()
            entry = self.store(key, record, wall_time=time.perf_counter() - started)
            return record, entry, False
