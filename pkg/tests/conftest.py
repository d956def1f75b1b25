from __future__ import annotations

import pytest

from shedline import HashEvaluator, LoadParameters, TrustCache, VirtualClock

_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.failed or report.when == "call":
        _acceptance.setdefault(name, "PASS" if report.passed else "FAIL")
        if report.failed:
            _acceptance[name] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance.items():
        terminalreporter.write_line(f"{outcome}  {name}")


@pytest.fixture
def params() -> LoadParameters:
    return LoadParameters(
        u_capacity=100,
        u_threshold=50,
        deadline_normal=1_000_000,
        deadline_overload=1_100_000,
        extension_weight=0.5,
        max_extension_factor=1.2,
        default_trust=2.5,
    )


@pytest.fixture
def clock() -> VirtualClock:
    return VirtualClock()


@pytest.fixture
def cache() -> TrustCache:
    return TrustCache()


@pytest.fixture
def hash10ms() -> HashEvaluator:
    return HashEvaluator(per_item_cost=10_000)
