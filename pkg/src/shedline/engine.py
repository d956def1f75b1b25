"""Deadline-aware load shedding over one batch of retrieved urls.

The batch is split at ``u_capacity`` into a normal queue and a drop queue.
The normal queue is always fully scored (cache first, then evaluator). Drop
queue items are scored from the cache when possible, then evaluated one by one
while the batch is still inside its deadline; whatever is left gets the mean
of the scores assigned so far. Nothing is ever dropped.

Two baselines are provided for comparison: full evaluation with no deadline,
and random shedding of everything past ``u_capacity + u_threshold``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence

from .cache import TrustCache
from .evaluators import Evaluator
from .model import (
    BatchReport,
    Clock,
    Duration,
    Instant,
    LoadClass,
    LoadParameters,
    Provenance,
    ScoredItem,
    Url,
    WorkItem,
    clamp_score,
    make_work_items,
)
from .monitor import classify_load, effective_deadline, extend_deadline


@dataclass(frozen=True, slots=True)
class QueuePair:
    normal_queue: tuple[WorkItem, ...]
    drop_queue: tuple[WorkItem, ...]


def partition(items: Sequence[WorkItem], u_capacity: int) -> QueuePair:
    return QueuePair(tuple(items[:u_capacity]), tuple(items[u_capacity:]))


def average_trust(assigned: Sequence[float], default_trust: float) -> float:
    if not assigned:
        return default_trust
    return clamp_score(math.fsum(assigned) / len(assigned))


def _score_one(
    item: WorkItem, cache: TrustCache, evaluator: Evaluator, clock: Clock
) -> ScoredItem:
    cached = cache.lookup(item.url)
    if cached is not None:
        return ScoredItem(item.url, item.arrival_index, cached, Provenance.CACHE_HIT, clock.now())
    value = evaluator.evaluate(item.url, clock)
    now = clock.now()
    cache.insert(item.url, value, now)
    return ScoredItem(item.url, item.arrival_index, value, Provenance.EVALUATED, now)


def run_normal(
    queue: Sequence[WorkItem], cache: TrustCache, evaluator: Evaluator, clock: Clock
) -> list[ScoredItem]:
    """Score every item: cache hits are free, misses are evaluated and written back."""
    return [_score_one(item, cache, evaluator, clock) for item in queue]


def run_heavy(
    queues: QueuePair,
    params: LoadParameters,
    cache: TrustCache,
    evaluator: Evaluator,
    clock: Clock,
    effective_deadline: Duration,
    start: Instant | None = None,
) -> list[ScoredItem]:
    """Normal queue in full, then the drop queue under ``effective_deadline``.

    The deadline is measured from ``start`` (defaults to the clock reading on
    entry) and is checked before each drop-queue evaluation begins, so one
    admitted evaluation may finish past it.
    """
    if start is None:
        start = clock.now()
    scored = run_normal(queues.normal_queue, cache, evaluator, clock)

    remaining: list[WorkItem] = []
    for item in queues.drop_queue:
        cached = cache.lookup(item.url)
        if cached is None:
            remaining.append(item)
        else:
            scored.append(
                ScoredItem(item.url, item.arrival_index, cached, Provenance.CACHE_HIT, clock.now())
            )

    pending = iter(remaining)
    for item in pending:
        if clock.now() - start >= effective_deadline:
            leftover = [item, *pending]
            break
        scored.append(_score_one(item, cache, evaluator, clock))
    else:
        leftover = []

    if leftover:
        fallback = average_trust([s.score for s in scored], params.default_trust)
        now = clock.now()
        scored.extend(
            ScoredItem(item.url, item.arrival_index, fallback, Provenance.AVERAGED, now)
            for item in leftover
        )
    scored.sort(key=lambda s: s.arrival_index)
    return scored


def run_very_heavy(
    items: Sequence[WorkItem],
    params: LoadParameters,
    cache: TrustCache,
    evaluator: Evaluator,
    clock: Clock,
    start: Instant | None = None,
) -> tuple[list[ScoredItem], Duration]:
    """Extend the deadline according to the overshoot, then run as heavy load.

    Returns the scored items and the extended deadline.
    """
    deadline = extend_deadline(len(items), params)
    queues = partition(items, params.u_capacity)
    return run_heavy(queues, params, cache, evaluator, clock, deadline, start), deadline


def process_batch(
    urls: Sequence[Url | str],
    params: LoadParameters,
    cache: TrustCache,
    evaluator: Evaluator,
    clock: Clock,
) -> BatchReport:
    items = make_work_items(urls)
    start = clock.now()
    load_class = classify_load(len(items), params)
    if load_class is LoadClass.NORMAL:
        scored = run_normal(items, cache, evaluator, clock)
        deadline = params.deadline_normal
    elif load_class is LoadClass.HEAVY:
        deadline = params.deadline_overload
        queues = partition(items, params.u_capacity)
        scored = run_heavy(queues, params, cache, evaluator, clock, deadline, start)
    else:
        scored, deadline = run_very_heavy(items, params, cache, evaluator, clock, start)
    return BatchReport.assemble(scored, load_class, deadline, clock.now() - start)


def process_batch_full(
    urls: Sequence[Url | str],
    cache: TrustCache,
    evaluator: Evaluator,
    clock: Clock,
    params: LoadParameters | None = None,
) -> BatchReport:
    """Evaluate everything, ignoring deadlines.

    ``params`` only feeds the reported load class and deadline; without it the
    batch is reported as Normal with a zero deadline.
    """
    items = make_work_items(urls)
    start = clock.now()
    scored = run_normal(items, cache, evaluator, clock)
    if params is None:
        load_class, deadline = LoadClass.NORMAL, 0
    else:
        load_class = classify_load(len(items), params)
        deadline = effective_deadline(len(items), params)
    return BatchReport.assemble(scored, load_class, deadline, clock.now() - start)


def process_batch_random_shed(
    urls: Sequence[Url | str],
    params: LoadParameters,
    cache: TrustCache,
    evaluator: Evaluator,
    clock: Clock,
    rng_seed: int,
    shed_fraction: float = 1.0,
) -> BatchReport:
    """Baseline that discards overflow instead of scoring it.

    Items past ``u_capacity + u_threshold`` form the overflow; a seeded random
    ``shed_fraction`` of it is dropped (default trust, no cost) and the rest is
    scored like the normal queue.
    """
    if not 0.0 <= shed_fraction <= 1.0:
        raise ValueError(f"shed_fraction must be in [0, 1], got {shed_fraction}")
    items = make_work_items(urls)
    start = clock.now()
    admitted = params.u_capacity + params.u_threshold
    overflow = items[admitted:]
    n_shed = round(shed_fraction * len(overflow))
    shed = set(random.Random(rng_seed).sample(range(len(overflow)), n_shed))

    scored = run_normal(items[:admitted], cache, evaluator, clock)
    for i, item in enumerate(overflow):
        if i in shed:
            scored.append(
                ScoredItem(item.url, item.arrival_index, params.default_trust,
                           Provenance.DROPPED, clock.now())
            )
        else:
            scored.append(_score_one(item, cache, evaluator, clock))
    return BatchReport.assemble(
        scored,
        classify_load(len(items), params),
        effective_deadline(len(items), params),
        clock.now() - start,
    )
