"""Load regime classification, capacity calibration and deadline extension."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .model import ConfigError, Duration, LoadClass, LoadParameters

# reported by calibration when evaluation is free
MAX_CAPACITY = 2**63 - 1


def _exact(x: float) -> Fraction:
    # decimal intent of the literal (0.9 means 9/10, not its binary neighbour)
    return Fraction(repr(float(x)))


def classify_load(uload: int, params: LoadParameters) -> LoadClass:
    if uload <= params.u_capacity:
        return LoadClass.NORMAL
    if uload <= params.u_capacity + params.u_threshold:
        return LoadClass.HEAVY
    return LoadClass.VERY_HEAVY


@dataclass(frozen=True, slots=True)
class CalibrationSample:
    per_item_cost: Duration
    sample_count: int

    def __post_init__(self) -> None:
        if self.per_item_cost <= 0:
            raise ConfigError("per_item_cost", f"must be > 0, got {self.per_item_cost}")
        if self.sample_count < 1:
            raise ConfigError("sample_count", f"must be >= 1, got {self.sample_count}")


def calibrate_capacity(
    sample: CalibrationSample, deadline_normal: Duration, safety_factor: float = 1.0
) -> int:
    """Largest item count whose total cost fits in ``safety_factor * deadline_normal``."""
    if deadline_normal <= 0:
        raise ConfigError("deadline_normal", "must be > 0 for calibration")
    if not 0 < safety_factor <= 1:
        raise ConfigError("safety_factor", f"must be in (0, 1], got {safety_factor}")
    budget = _exact(safety_factor) * deadline_normal
    return max(1, math.floor(budget / sample.per_item_cost))


def extend_deadline(uload: int, params: LoadParameters) -> Duration:
    """Stretched deadline for a very-heavy batch.

    The overload deadline grows linearly with how far ``uload`` overshoots
    ``u_capacity + u_threshold`` (as a fraction of that bound), scaled by
    ``extension_weight`` and capped at ``max_extension_factor`` times the
    overload deadline. Rounded down to whole microseconds.
    """
    if classify_load(uload, params) is not LoadClass.VERY_HEAVY:
        raise ValueError(
            f"deadline extension only applies to very heavy load (uload={uload})"
        )
    bound = params.u_capacity + params.u_threshold
    excess_ratio = Fraction(uload - bound, bound)
    base = params.deadline_overload
    extended = base * (1 + _exact(params.extension_weight) * excess_ratio)
    cap = base * _exact(params.max_extension_factor)
    return math.floor(min(extended, cap))


def effective_deadline(uload: int, params: LoadParameters) -> Duration:
    """Deadline the shedding engine enforces for a batch of ``uload`` items."""
    load_class = classify_load(uload, params)
    if load_class is LoadClass.NORMAL:
        return params.deadline_normal
    if load_class is LoadClass.HEAVY:
        return params.deadline_overload
    return extend_deadline(uload, params)
