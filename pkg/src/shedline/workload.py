"""Synthetic query workloads and the response-time / trust-accuracy metrics."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .cache import TrustCache
from .engine import process_batch, process_batch_full, process_batch_random_shed
from .evaluators import Evaluator, oracle_scores
from .model import (
    BatchReport,
    Clock,
    ConfigError,
    Duration,
    LoadParameters,
    Provenance,
    Url,
    VirtualClock,
)


@dataclass(frozen=True)
class WorkloadSpec:
    n_batches: int
    batch_size_choices: tuple[int, ...]
    url_universe: int
    zipf_exponent: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "batch_size_choices", tuple(self.batch_size_choices))
        if self.n_batches < 1:
            raise ConfigError("n_batches", "must be >= 1")
        if not self.batch_size_choices:
            raise ConfigError("batch_size_choices", "must not be empty")
        if any(size < 0 for size in self.batch_size_choices):
            raise ConfigError("batch_size_choices", "sizes must be >= 0")
        if self.url_universe < 1:
            raise ConfigError("url_universe", "must be >= 1")
        if not self.zipf_exponent >= 0:
            raise ConfigError("zipf_exponent", "must be >= 0")


def universe_url(i: int) -> Url:
    return Url(f"http://site{i}.example/doc/{i}")


def generate_workload(spec: WorkloadSpec) -> list[list[Url]]:
    """Draw ``n_batches`` result lists.

    Each batch picks a size from ``batch_size_choices``, draws that many urls
    with rank-``i`` probability proportional to ``1 / (i + 1) ** zipf_exponent``
    and removes repeats (first occurrence wins), so batches may come out
    smaller than the drawn size.
    """
    rng = random.Random(spec.seed)
    weights = [1.0 / (i + 1) ** spec.zipf_exponent for i in range(spec.url_universe)]
    cum_weights = list(itertools.accumulate(weights))
    population = range(spec.url_universe)
    batches = []
    for _ in range(spec.n_batches):
        size = rng.choice(spec.batch_size_choices)
        draws = rng.choices(population, cum_weights=cum_weights, k=size)
        batches.append([universe_url(i) for i in dict.fromkeys(draws)])
    return batches


@dataclass(frozen=True)
class Metrics:
    response_time: Duration
    deadline_met: bool
    coverage_evaluated: float
    coverage_cached: float
    coverage_averaged: float
    coverage_dropped: float
    trust_mae: float
    trust_mean: float


class MissingOracleError(KeyError):
    pass


def compute_metrics(
    report: BatchReport,
    oracle: Mapping[Url, float],
    effective_deadline: Duration,
    slack: Duration = 0,
) -> Metrics:
    """Metrics for one batch.

    ``slack`` is the cost of one evaluation: an evaluation admitted just before
    the deadline may finish after it without counting as a miss. Empty batches
    report zero coverage, zero error and a zero mean.
    """
    n = report.uload
    errors, assigned = [], []
    for item in report.items:
        if item.url not in oracle:
            raise MissingOracleError(f"no oracle score for {item.url}")
        errors.append(abs(item.score - oracle[item.url]))
        assigned.append(item.score)

    def frac(p: Provenance) -> float:
        return report.count(p) / n if n else 0.0

    return Metrics(
        response_time=report.elapsed,
        deadline_met=report.elapsed <= effective_deadline + slack,
        coverage_evaluated=frac(Provenance.EVALUATED),
        coverage_cached=frac(Provenance.CACHE_HIT),
        coverage_averaged=frac(Provenance.AVERAGED),
        coverage_dropped=frac(Provenance.DROPPED),
        trust_mae=math.fsum(errors) / n if n else 0.0,
        trust_mean=math.fsum(assigned) / n if n else 0.0,
    )


EngineFn = Callable[..., BatchReport]


def _proposed(urls, params, cache, evaluator, clock, **_):
    return process_batch(urls, params, cache, evaluator, clock)


def _full(urls, params, cache, evaluator, clock, **_):
    return process_batch_full(urls, cache, evaluator, clock, params)


def _random_shed(urls, params, cache, evaluator, clock, *, rng_seed, shed_fraction, **_):
    return process_batch_random_shed(
        urls, params, cache, evaluator, clock, rng_seed, shed_fraction
    )


ENGINES: dict[str, EngineFn] = {
    "proposed": _proposed,
    "full": _full,
    "random_shed": _random_shed,
}


@dataclass(frozen=True)
class MetricRow:
    batch_id: int | str
    engine: str
    uload: int
    load_class: str
    effective_deadline_us: float
    elapsed_us: float
    deadline_met: bool
    n_evaluated: int
    n_cached: int
    n_averaged: int
    n_dropped: int
    trust_mae: float
    trust_mean: float


COLUMNS = tuple(MetricRow.__dataclass_fields__)


@dataclass
class ComparisonTable:
    rows: list[MetricRow] = field(default_factory=list)
    aggregates: dict[str, MetricRow] = field(default_factory=dict)
    speedup: float | None = None

    def for_engine(self, engine: str) -> list[MetricRow]:
        return [r for r in self.rows if r.engine == engine]

    def all_rows(self) -> list[MetricRow]:
        out = []
        for engine, agg in self.aggregates.items():
            out.extend(self.for_engine(engine))
            out.append(agg)
        return out

    def to_csv(self) -> str:
        lines = [",".join(COLUMNS)]
        for row in self.all_rows():
            lines.append(",".join(_fmt(getattr(row, c)) for c in COLUMNS))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "rows": [asdict(r) for r in self.rows],
            "aggregates": {k: asdict(v) for k, v in self.aggregates.items()},
            "speedup": self.speedup,
        }


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _row(batch_id, engine: str, report: BatchReport, m: Metrics) -> MetricRow:
    return MetricRow(
        batch_id=batch_id,
        engine=engine,
        uload=report.uload,
        load_class=report.load_class.value,
        effective_deadline_us=report.effective_deadline,
        elapsed_us=report.elapsed,
        deadline_met=m.deadline_met,
        n_evaluated=report.count(Provenance.EVALUATED),
        n_cached=report.count(Provenance.CACHE_HIT),
        n_averaged=report.count(Provenance.AVERAGED),
        n_dropped=report.count(Provenance.DROPPED),
        trust_mae=m.trust_mae,
        trust_mean=m.trust_mean,
    )


def _aggregate(engine: str, rows: Sequence[MetricRow]) -> MetricRow:
    """Counts are summed, times averaged per batch, trust columns weighted by items."""
    n_items = sum(r.uload for r in rows)
    classes = {r.load_class for r in rows}

    def weighted(attr: str) -> float:
        if not n_items:
            return 0.0
        return math.fsum(getattr(r, attr) * r.uload for r in rows) / n_items

    return MetricRow(
        batch_id="ALL",
        engine=engine,
        uload=n_items,
        load_class=classes.pop() if len(classes) == 1 else "mixed",
        effective_deadline_us=math.fsum(r.effective_deadline_us for r in rows) / len(rows),
        elapsed_us=math.fsum(r.elapsed_us for r in rows) / len(rows),
        deadline_met=all(r.deadline_met for r in rows),
        n_evaluated=sum(r.n_evaluated for r in rows),
        n_cached=sum(r.n_cached for r in rows),
        n_averaged=sum(r.n_averaged for r in rows),
        n_dropped=sum(r.n_dropped for r in rows),
        trust_mae=weighted("trust_mae"),
        trust_mean=weighted("trust_mean"),
    )


def compare_engines(
    workload: Sequence[Sequence[Url]],
    params: LoadParameters,
    evaluator: Evaluator,
    engines: Iterable[str],
    *,
    seed: int = 0,
    shed_fraction: float = 1.0,
    shared_cache: bool = False,
    initial_cache: TrustCache | None = None,
    clock_factory: Callable[[], Clock] = VirtualClock,
) -> ComparisonTable:
    """Run every engine over the same batches and tabulate metrics.

    Each engine gets its own clock and, unless ``shared_cache`` is set, its own
    copy of ``initial_cache`` (empty by default).
    """
    engines = list(dict.fromkeys(engines))
    unknown = [e for e in engines if e not in ENGINES]
    if unknown:
        raise ConfigError("engines", f"unknown engine(s) {unknown}; expected {sorted(ENGINES)}")
    base = initial_cache if initial_cache is not None else TrustCache()
    common = base if shared_cache else None
    table = ComparisonTable()
    for engine in engines:
        cache = common if common is not None else base.copy()
        clock = clock_factory()
        rows = []
        for batch_id, urls in enumerate(workload):
            report = ENGINES[engine](
                urls, params, cache, evaluator, clock,
                rng_seed=seed + batch_id, shed_fraction=shed_fraction,
            )
            metrics = compute_metrics(
                report, oracle_scores(evaluator, urls), report.effective_deadline,
                slack=evaluator.max_cost,
            )
            rows.append(_row(batch_id, engine, report, metrics))
        table.rows.extend(rows)
        table.aggregates[engine] = _aggregate(engine, rows)
    if "proposed" in table.aggregates and "full" in table.aggregates:
        proposed = table.aggregates["proposed"].elapsed_us
        full = table.aggregates["full"].elapsed_us
        if proposed:
            table.speedup = full / proposed
        else:
            table.speedup = math.inf if full else 1.0
    return table
