"""Persistent URL -> trust score store, consulted before any evaluation.

On disk the cache is UTF-8 JSON lines, one entry per line::

    {"url": "http://a.com", "trust": 4.2, "evaluated_at": 10000}

Unknown keys are rejected.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .model import Instant, ScoreRangeError, Url, as_url, trust_score

_KEYS = frozenset({"url", "trust", "evaluated_at"})


class CacheFormatError(ValueError):
    def __init__(self, path: str | os.PathLike, line_no: int, message: str) -> None:
        super().__init__(f"{path}:{line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True, slots=True)
class TrustCacheEntry:
    url: Url
    score: float
    evaluated_at: Instant


class TrustCache:
    """In-memory map with JSON-lines persistence.

    Reads take no lock. Writes are serialized so each insert is atomic.
    """

    def __init__(self, entries: dict[Url, TrustCacheEntry] | None = None) -> None:
        self._entries: dict[Url, TrustCacheEntry] = dict(entries or {})
        self._write_lock = threading.Lock()

    def lookup(self, url: Url | str) -> float | None:
        entry = self._entries.get(as_url(url))
        return None if entry is None else entry.score

    def insert(self, url: Url | str, score: float, at: Instant) -> None:
        url = as_url(url)
        entry = TrustCacheEntry(url, trust_score(score), at)
        with self._write_lock:
            self._entries[url] = entry

    def entries(self) -> Iterator[TrustCacheEntry]:
        return iter(list(self._entries.values()))

    def copy(self) -> TrustCache:
        return TrustCache(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, url: object) -> bool:
        if isinstance(url, str):
            url = Url(url)
        return url in self._entries

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrustCache):
            return NotImplemented
        return self._entries == other._entries

    def __repr__(self) -> str:
        return f"TrustCache(size={len(self)})"

    def save(self, path: str | os.PathLike) -> int:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        n = 0
        with open(tmp, "w", encoding="utf-8") as fh:
            for entry in self.entries():
                record = {
                    "url": entry.url.value,
                    "trust": entry.score,
                    "evaluated_at": entry.evaluated_at,
                }
                fh.write(json.dumps(record) + "\n")
                n += 1
        os.replace(tmp, path)
        return n

    @classmethod
    def load(cls, path: str | os.PathLike, create_if_missing: bool = False) -> TrustCache:
        if create_if_missing and not os.path.exists(path):
            return cls()
        cache = cls()
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                url, score, at = _parse_record(path, line_no, line)
                cache._entries[url] = TrustCacheEntry(url, score, at)
        return cache


def _parse_record(path, line_no: int, line: str) -> tuple[Url, float, int]:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CacheFormatError(path, line_no, f"malformed JSON ({exc.msg})") from None
    if not isinstance(record, dict):
        raise CacheFormatError(path, line_no, "expected a JSON object")
    keys = set(record)
    if keys != _KEYS:
        extra, missing = sorted(keys - _KEYS), sorted(_KEYS - keys)
        raise CacheFormatError(
            path, line_no, f"bad keys (unknown={extra}, missing={missing})"
        )
    url, trust, at = record["url"], record["trust"], record["evaluated_at"]
    if not isinstance(url, str):
        raise CacheFormatError(path, line_no, "url must be a string")
    if isinstance(at, bool) or not isinstance(at, int) or at < 0:
        raise CacheFormatError(path, line_no, "evaluated_at must be a non-negative integer")
    try:
        score = trust_score(trust)
        parsed = Url(url)
    except (ScoreRangeError, ValueError) as exc:
        raise CacheFormatError(path, line_no, str(exc)) from None
    return parsed, score, at
