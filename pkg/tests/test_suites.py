import asyncio
from concurrent.futures import ThreadPoolExecutor

import pytest

from config.config import RunConfig
from src.core.event_bus import MultiResultBus, UnknownSuiteError
from src.core.events import Status, merge_worst, residual_result
from src.suites.algebra import cubic_checks, hyperquadric_checks
from src.suites.base import Suite
from src.suites.grassmann import killing_scan
from src.suites.runner import SUITE_CLASSES, SUITE_ORDER, selected_suites
from src.utils.logging.logger import Logger, LoggerConfig


def all_pass(results):
    bad = [(r.name, r.residual, r.detail) for r in results if not r.passed]
    assert not bad, bad


class TwoChecks(Suite):
    name = "two"
    channel = "algebra"

    def build(self):
        return self.tagged("n=2", [
            self.batch(lambda: [residual_result("algebra", "small", "r = 0", 0.0, 1.0)]),
            self.batch(lambda: residual_result("algebra", "large", "r = 0", 2.0, 1.0)),
        ])


def test_suite_publishes_in_batch_order():
    async def scenario():
        bus = MultiResultBus(["algebra"])
        logger = Logger(LoggerConfig(stout=False))
        with ThreadPoolExecutor(max_workers=2) as pool:
            count = await TwoChecks(RunConfig(), bus, logger, pool).start()
        await logger.shutdown()
        return count, bus.drain("algebra")

    count, results = asyncio.run(scenario())
    assert count == 2
    assert [r.name for r in results] == ["small[n=2]", "large[n=2]"]
    assert [r.seq_id for r in results] == [1, 2]
    assert [r.status for r in results] == [Status.PASS, Status.FAIL]


def test_unknown_channel_rejected():
    bus = MultiResultBus(["chart"])
    with pytest.raises(UnknownSuiteError):
        asyncio.run(bus.put(residual_result("algebra", "x", "r = 0", 0.0, 1.0)))


def test_merge_worst():
    runs = [
        residual_result("grassmann", "a", "r = 0", 1e-12, 1e-8, samples=1),
        residual_result("grassmann", "b", "r = 0", 1e-10, 1e-8, samples=1),
        residual_result("grassmann", "a", "r = 0", 1e-11, 1e-8, samples=1),
        residual_result("grassmann", "b", "r = 0", 1e-3, 1e-8, samples=1),
    ]
    merged = merge_worst(runs)
    assert [r.name for r in merged] == ["a", "b"]
    assert merged[0].residual == 1e-11 and merged[0].passed
    assert merged[0].samples == 2 and merged[0].detail["runs"] == 2
    assert merged[1].status is Status.FAIL and merged[1].residual == 1e-3


def test_registry():
    assert set(SUITE_CLASSES) == set(SUITE_ORDER)
    assert selected_suites("all") == list(SUITE_ORDER)
    assert selected_suites("chart") == ["chart"]
    assert {cls.channel for cls in SUITE_CLASSES.values()} == {"algebra", "grassmann", "integrate", "obstruct", "chart"}


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_hyperquadric_checks(n):
    results = hyperquadric_checks(n, 1e-9, seed=n)
    all_pass(results)
    names = {r.name for r in results}
    if n % 2:
        assert "hyperquadric_empty" in names
    else:
        assert {"hyperquadric_members", "cubic_zero_locus"} <= names


@pytest.mark.parametrize("n", [2, 3])
def test_cubic_checks(n):
    all_pass(cubic_checks(n, 1e-10, seed=n))


def test_killing_scan(grassmann_models):
    results = killing_scan(grassmann_models[2], 3, 1e-9, seed=5)
    all_pass(results)
    assert all(r.detail["runs"] == 3 for r in results)
