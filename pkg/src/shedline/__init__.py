"""Deadline-aware load shedding for batches of retrieved urls."""

from .cache import CacheFormatError, TrustCache, TrustCacheEntry
from .engine import (
    QueuePair,
    average_trust,
    partition,
    process_batch,
    process_batch_full,
    process_batch_random_shed,
    run_heavy,
    run_normal,
    run_very_heavy,
)
from .evaluators import (
    EvaluatorSpec,
    FixedCostEvaluator,
    HashEvaluator,
    ScriptedEvaluator,
    UnknownUrlError,
    fnv1a_64,
    oracle_scores,
)
from .model import (
    BatchReport,
    ConfigError,
    LoadClass,
    LoadParameters,
    Provenance,
    ScoredItem,
    ScoreRangeError,
    Url,
    VirtualClock,
    WallClock,
    WorkItem,
    trust_score,
)
from .monitor import (
    CalibrationSample,
    calibrate_capacity,
    classify_load,
    effective_deadline,
    extend_deadline,
)
from .workload import (
    ComparisonTable,
    Metrics,
    WorkloadSpec,
    compare_engines,
    compute_metrics,
    generate_workload,
)

__version__ = "0.1.0"
