"""Shared value types, the trust-score scale and the clock contract.

All times are integer microseconds. A ``Duration`` is a non-negative span and
an ``Instant`` is a reading from a clock relative to that clock's origin.
"""

from __future__ import annotations

import enum
import math
import string
import time
from dataclasses import dataclass, field
from typing import Mapping, Protocol, Sequence

SCORE_MIN = 0.0
SCORE_MAX = 5.0

Duration = int
Instant = int


class ConfigError(ValueError):
    """A parameter failed validation. ``field`` names the offending setting."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


class ScoreRangeError(ValueError):
    pass


def trust_score(value: float) -> float:
    """Validate a trust score and return it as a float."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScoreRangeError(f"trust score must be a number, got {value!r}")
    value = float(value)
    if math.isnan(value) or not SCORE_MIN <= value <= SCORE_MAX:
        raise ScoreRangeError(
            f"trust score {value!r} outside [{SCORE_MIN}, {SCORE_MAX}]"
        )
    return value


def clamp_score(value: float) -> float:
    return min(SCORE_MAX, max(SCORE_MIN, value))


_TRAILING = "/" + string.whitespace


def normalize_url(text: str) -> str:
    """Lowercase scheme and host, drop surrounding whitespace and trailing slashes.

    >>> normalize_url("HTTP://A.com/")
    'http://a.com'
    """
    s = text.strip()
    scheme, sep, rest = s.partition("://")
    if sep:
        cut = len(rest)
        for ch in "/?#":
            pos = rest.find(ch)
            if pos != -1:
                cut = min(cut, pos)
        s = scheme.lower() + sep + rest[:cut].lower() + rest[cut:]
    return s.rstrip(_TRAILING)


@dataclass(frozen=True, slots=True)
class Url:
    value: str

    def __post_init__(self) -> None:
        if not isinstance(self.value, str):
            raise TypeError(f"url must be text, got {type(self.value).__name__}")
        normalized = normalize_url(self.value)
        if not normalized:
            raise ValueError(f"url {self.value!r} is empty after normalization")
        object.__setattr__(self, "value", normalized)

    def __str__(self) -> str:
        return self.value


def as_url(value: Url | str) -> Url:
    return value if isinstance(value, Url) else Url(value)


class LoadClass(str, enum.Enum):
    NORMAL = "Normal"
    HEAVY = "Heavy"
    VERY_HEAVY = "VeryHeavy"


class Provenance(str, enum.Enum):
    EVALUATED = "Evaluated"
    CACHE_HIT = "CacheHit"
    AVERAGED = "Averaged"
    # only the random-drop baseline produces this
    DROPPED = "Dropped"


@dataclass(frozen=True, slots=True)
class LoadParameters:
    """Tunables for one engine instance.

    ``u_capacity`` items are always evaluated; up to ``u_threshold`` more are
    tolerated under the overload deadline before the very-heavy regime kicks in
    and the deadline is stretched (see :func:`shedline.monitor.extend_deadline`).
    """

    u_capacity: int
    u_threshold: int
    deadline_normal: Duration
    deadline_overload: Duration
    extension_weight: float = 0.5
    max_extension_factor: float = 2.0
    default_trust: float = 2.5

    def __post_init__(self) -> None:
        for name in ("u_capacity", "u_threshold", "deadline_normal", "deadline_overload"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(name, f"must be an integer, got {value!r}")
        if self.u_capacity < 1:
            raise ConfigError("u_capacity", f"must be >= 1, got {self.u_capacity}")
        if self.u_threshold < 0:
            raise ConfigError("u_threshold", f"must be >= 0, got {self.u_threshold}")
        if self.deadline_normal < 0:
            raise ConfigError("deadline_normal", "must be non-negative")
        if self.deadline_overload < self.deadline_normal:
            raise ConfigError(
                "deadline_overload",
                f"must be >= deadline_normal ({self.deadline_normal}), "
                f"got {self.deadline_overload}",
            )
        if not self.extension_weight >= 0:
            raise ConfigError("extension_weight", "must be >= 0")
        if not self.max_extension_factor >= 1:
            raise ConfigError("max_extension_factor", "must be >= 1")
        try:
            trust_score(self.default_trust)
        except ScoreRangeError as exc:
            raise ConfigError("default_trust", str(exc)) from None


@dataclass(frozen=True, slots=True)
class WorkItem:
    url: Url
    arrival_index: int


@dataclass(frozen=True, slots=True)
class ScoredItem:
    url: Url
    arrival_index: int
    score: float
    provenance: Provenance
    scored_at: Instant

    def __post_init__(self) -> None:
        trust_score(self.score)


@dataclass(frozen=True)
class BatchReport:
    items: tuple[ScoredItem, ...]
    uload: int
    load_class: LoadClass
    effective_deadline: Duration
    elapsed: Duration
    counts: Mapping[Provenance, int] = field(default_factory=dict)

    @classmethod
    def assemble(
        cls,
        scored: Sequence[ScoredItem],
        load_class: LoadClass,
        effective_deadline: Duration,
        elapsed: Duration,
    ) -> BatchReport:
        items = tuple(sorted(scored, key=lambda s: s.arrival_index))
        counts = {p: 0 for p in Provenance}
        for item in items:
            counts[item.provenance] += 1
        return cls(items, len(items), load_class, effective_deadline, elapsed, counts)

    def count(self, provenance: Provenance) -> int:
        return self.counts.get(provenance, 0)


def make_work_items(urls: Sequence[Url | str]) -> list[WorkItem]:
    return [WorkItem(as_url(u), i) for i, u in enumerate(urls)]


class Clock(Protocol):
    def now(self) -> Instant: ...

    def advance(self, d: Duration) -> Instant: ...


class VirtualClock:
    """Logical clock that only moves when told to."""

    def __init__(self, start: Instant = 0) -> None:
        self._now = start

    def now(self) -> Instant:
        return self._now

    def advance(self, d: Duration) -> Instant:
        if d < 0:
            raise ValueError(f"cannot advance a clock by a negative duration ({d})")
        self._now += d
        return self._now


class WallClock:
    """OS monotonic time in microseconds since construction.

    ``advance`` sleeps, so evaluators that charge a cost consume real time.
    """

    def __init__(self) -> None:
        self._origin = time.monotonic_ns()

    def now(self) -> Instant:
        return (time.monotonic_ns() - self._origin) // 1000

    def advance(self, d: Duration) -> Instant:
        if d < 0:
            raise ValueError(f"cannot advance a clock by a negative duration ({d})")
        if d:
            time.sleep(d / 1_000_000)
        return self.now()
