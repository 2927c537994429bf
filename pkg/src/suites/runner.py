import asyncio
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Type

from config.config import RunConfig
from src.core.event_bus import MultiResultBus
from src.core.events import CheckResult
from src.suites.algebra import AlgebraSuite
from src.suites.base import Suite
from src.suites.chart import ChartSuite
from src.suites.grassmann import GrassmannSuite
from src.suites.integrals import IntegralsSuite
from src.suites.obstruction import ObstructionSuite
from src.utils.logging.logger import Logger

SUITE_CLASSES: Dict[str, Type[Suite]] = {
    cls.name: cls for cls in (AlgebraSuite, ChartSuite, GrassmannSuite, IntegralsSuite, ObstructionSuite)
}

# report order for --suite all
SUITE_ORDER = ("algebra", "grassmann", "integrals", "obstruction", "chart")


def selected_suites(suite: str) -> List[str]:
    return list(SUITE_ORDER) if suite == "all" else [suite]


async def run_suites(config: RunConfig, logger: Logger) -> List[CheckResult]:
    """
    Runs the selected suites concurrently and returns their records.

    Records come back grouped by suite in report order, each group in
    publication order.
    """
    classes = [SUITE_CLASSES[name] for name in selected_suites(config.suite)]
    bus = MultiResultBus([cls.channel for cls in classes])

    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        suites = [cls(config, bus, logger, pool) for cls in classes]
        await asyncio.gather(*[s.start() for s in suites])

    results: List[CheckResult] = []
    for cls in classes:
        bus.close(cls.channel)
        results += bus.drain(cls.channel)
    return results
