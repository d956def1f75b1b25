"""Trust evaluators.

The engine only needs a url -> score function with a per-call cost. Real trust
computation is out of scope; these implementations exist for tests,
benchmarks and as the accuracy oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Protocol

from .model import (
    Clock,
    ConfigError,
    Duration,
    SCORE_MAX,
    Url,
    WorkItem,
    as_url,
    trust_score,
)

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a_64(data: bytes) -> int:
    h = FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h


def hash_score(url: Url) -> float:
    return SCORE_MAX * (fnv1a_64(url.value.encode("utf-8")) / 2**64)


class UnknownUrlError(LookupError):
    pass


class Evaluator(Protocol):
    max_cost: Duration

    def score(self, url: Url) -> float:
        """Trust score with no clock side effect."""

    def cost(self, url: Url) -> Duration: ...

    def evaluate(self, url: Url, clock: Clock) -> float: ...


class _Charged:
    def evaluate(self, url: Url, clock: Clock) -> float:
        url = as_url(url)
        value = self.score(url)
        clock.advance(self.cost(url))
        return value


class HashEvaluator(_Charged):
    """Score is FNV-1a of the normalized url scaled onto the trust range."""

    def __init__(self, per_item_cost: Duration = 0) -> None:
        if per_item_cost < 0:
            raise ConfigError("per_item_cost", "must be >= 0")
        self.per_item_cost = per_item_cost
        self.max_cost = per_item_cost

    def score(self, url: Url) -> float:
        return hash_score(as_url(url))

    def cost(self, url: Url) -> Duration:
        return self.per_item_cost


class FixedCostEvaluator(_Charged):
    """Constant score, constant cost. Useful for calibration and cost accounting."""

    def __init__(self, per_item_cost: Duration, score: float = 2.5) -> None:
        if per_item_cost < 0:
            raise ConfigError("per_item_cost", "must be >= 0")
        self.per_item_cost = per_item_cost
        self.max_cost = per_item_cost
        self._score = trust_score(score)

    def score(self, url: Url) -> float:
        return self._score

    def cost(self, url: Url) -> Duration:
        return self.per_item_cost


class ScriptedEvaluator(_Charged):
    def __init__(self, script: Mapping[Url | str, tuple[float, Duration]]) -> None:
        self._script: dict[Url, tuple[float, Duration]] = {}
        for url, (value, cost) in script.items():
            if cost < 0:
                raise ConfigError("script", f"negative cost for {url}")
            self._script[as_url(url)] = (trust_score(value), cost)
        self.max_cost = max((c for _, c in self._script.values()), default=0)

    def _entry(self, url: Url) -> tuple[float, Duration]:
        try:
            return self._script[as_url(url)]
        except KeyError:
            raise UnknownUrlError(f"scripted evaluator has no entry for {url}") from None

    def score(self, url: Url) -> float:
        return self._entry(url)[0]

    def cost(self, url: Url) -> Duration:
        return self._entry(url)[1]


def oracle_scores(evaluator: Evaluator, items: Iterable[WorkItem | Url]) -> dict[Url, float]:
    """Ground-truth score of every item, ignoring deadlines and clocks."""
    out: dict[Url, float] = {}
    for item in items:
        url = item.url if isinstance(item, WorkItem) else as_url(item)
        out[url] = evaluator.score(url)
    return out


EVALUATOR_KINDS = ("deterministic_hash", "fixed_cost", "scripted")


@dataclass(frozen=True)
class EvaluatorSpec:
    kind: str
    per_item_cost: Duration = 0
    score: float = 2.5
    script: tuple[tuple[str, float, Duration], ...] = field(default=())

    def build(self) -> Evaluator:
        if self.kind == "deterministic_hash":
            return HashEvaluator(self.per_item_cost)
        if self.kind == "fixed_cost":
            return FixedCostEvaluator(self.per_item_cost, self.score)
        if self.kind == "scripted":
            return ScriptedEvaluator({u: (s, c) for u, s, c in self.script})
        raise ConfigError("evaluator.kind", f"unknown kind {self.kind!r}; expected one of {EVALUATOR_KINDS}")
