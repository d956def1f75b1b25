import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from _oracle import extended_deadline
from shedline.model import ConfigError, LoadClass, LoadParameters
from shedline.monitor import (
    CalibrationSample,
    calibrate_capacity,
    classify_load,
    effective_deadline,
    extend_deadline,
)


def params(cap=100, thr=50, dn=1_000_000, do=1_500_000, w=0.5, f=2.0):
    return LoadParameters(cap, thr, dn, do, w, f)


@pytest.mark.parametrize(
    "uload, expected",
    [
        (0, LoadClass.NORMAL),
        (100, LoadClass.NORMAL),
        (101, LoadClass.HEAVY),
        (150, LoadClass.HEAVY),
        (151, LoadClass.VERY_HEAVY),
    ],
)
def test_classify_examples(uload, expected):
    assert classify_load(uload, params()) is expected


def test_zero_threshold_has_no_heavy_regime():
    p = params(cap=5, thr=0)
    assert [classify_load(u, p) for u in (5, 6)] == [LoadClass.NORMAL, LoadClass.VERY_HEAVY]


@given(
    cap=st.integers(1, 50),
    thr=st.integers(0, 50),
    uload=st.integers(0, 200),
)
def test_classification_total_and_exclusive(cap, thr, uload):
    p = params(cap=cap, thr=thr)
    matches = [
        uload <= cap,
        cap < uload <= cap + thr,
        uload > cap + thr,
    ]
    assert sum(matches) == 1
    expected = [LoadClass.NORMAL, LoadClass.HEAVY, LoadClass.VERY_HEAVY][matches.index(True)]
    assert classify_load(uload, p) is expected


def _fits(cost, budget):
    # oracle: count how many whole costs fit before exceeding the budget
    n, spent = 0, 0
    while spent + cost <= budget:
        spent += cost
        n += 1
    return n


class TestCalibrate:
    def test_exact_fit(self):
        assert _fits(10_000, 1_000_000) == 100
        assert calibrate_capacity(CalibrationSample(10_000, 5), 1_000_000, 1.0) == 100

    def test_headroom(self):
        assert _fits(10_000, 900_000) == 90
        assert calibrate_capacity(CalibrationSample(10_000, 5), 1_000_000, 0.9) == 90

    def test_clamps_to_one(self):
        assert calibrate_capacity(CalibrationSample(2_000_000, 1), 1_000_000, 1.0) == 1

    @given(
        cost=st.integers(50, 100_000),
        deadline=st.integers(1, 2_000_000),
        safety=st.sampled_from([0.25, 0.5, 0.75, 0.9, 1.0]),
    )
    def test_bracket(self, cost, deadline, safety):
        c = calibrate_capacity(CalibrationSample(cost, 1), deadline, safety)
        budget = Fraction(str(safety)) * deadline
        if c > 1:
            assert c * cost <= budget < (c + 1) * cost
        assert c == max(1, _fits(cost, budget))

    @pytest.mark.parametrize("cost, count", [(0, 1), (-5, 1), (10, 0)])
    def test_invalid_sample(self, cost, count):
        with pytest.raises(ConfigError):
            CalibrationSample(cost, count)

    @pytest.mark.parametrize("safety", [0.0, 1.5])
    def test_invalid_safety(self, safety):
        with pytest.raises(ConfigError):
            calibrate_capacity(CalibrationSample(10, 1), 100, safety)


class TestExtendDeadline:
    def test_double_overload(self):
        assert extended_deadline(300, 100, 50, 1_500_000, "0.5", "2.0") == 2_250_000
        assert extend_deadline(300, params()) == 2_250_000

    def test_just_over_boundary(self):
        assert extended_deadline(151, 100, 50, 1_500_000, "0.5", "2.0") == 1_505_000
        assert extend_deadline(151, params()) == 1_505_000

    def test_cap_binds(self):
        assert extend_deadline(1_000_000, params()) == 3_000_000

    @pytest.mark.parametrize("uload", [0, 100, 150])
    def test_rejects_non_very_heavy(self, uload):
        with pytest.raises(ValueError):
            extend_deadline(uload, params())

    @given(
        cap=st.integers(1, 200),
        thr=st.integers(0, 200),
        do=st.integers(0, 5_000_000),
        w=st.sampled_from(["0", "0.1", "0.5", "1", "2.5"]),
        f=st.sampled_from(["1", "1.2", "1.5", "3"]),
        extra=st.integers(1, 5_000),
    )
    def test_matches_oracle_and_bounds(self, cap, thr, do, w, f, extra):
        p = LoadParameters(cap, thr, 0, do, float(w), float(f))
        u = cap + thr + extra
        d = extend_deadline(u, p)
        assert d == extended_deadline(u, cap, thr, do, w, f)
        assert do <= d <= do * float(f) + 1e-6
        assert extend_deadline(u + 1, p) >= d


def test_effective_deadline_by_regime():
    p = params()
    assert effective_deadline(10, p) == 1_000_000
    assert effective_deadline(120, p) == 1_500_000
    assert effective_deadline(300, p) == 2_250_000


def test_random_parameter_sets_brute_force():
    rng = random.Random(11)
    for _ in range(50):
        cap, thr = rng.randint(1, 40), rng.randint(0, 40)
        p = params(cap=cap, thr=thr)
        for u in range(cap + thr + 11):
            got = classify_load(u, p)
            if u <= cap:
                assert got is LoadClass.NORMAL
            elif u <= cap + thr:
                assert got is LoadClass.HEAVY
            else:
                assert got is LoadClass.VERY_HEAVY
