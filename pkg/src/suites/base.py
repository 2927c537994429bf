import asyncio
from abc import ABC, abstractmethod
from concurrent.futures import Executor
from dataclasses import replace
from functools import partial
from typing import Callable, List, Sequence

from config.config import RunConfig
from src.core.event_bus import MultiResultBus
from src.core.events import CheckResult
from src.utils.logging.logger import Logger
from src.utils.misc_utils import time_s


class Suite(ABC):
    """
    A group of checks published under one suite name.

    `build` returns the batches to run; each batch is a blocking callable
    returning check records. Batches run on the shared executor and their
    records are published in batch order, so sequence ids do not depend on
    which batch finishes first.
    """

    name: str = ""
    # suite tag carried by the records, also the bus key
    channel: str = ""

    def __init__(self, config: RunConfig, bus: MultiResultBus, logger: Logger, pool: Executor) -> None:
        self.config = config
        self.tol = config.tolerances
        self.bus = bus
        self.logger = logger
        self.pool = pool

    @abstractmethod
    def build(self) -> List[Callable[[], List[CheckResult]]]:
        pass

    async def _run_batch(self, batch: Callable[[], List[CheckResult]]) -> List[CheckResult]:
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(self.pool, batch)

    async def start(self) -> int:
        """Runs every batch and publishes the records; returns the number published."""
        t0 = time_s()
        self.logger.info(f"SUITE {self.name} - starting with n={list(self.config.n)} seed={self.config.seed}")
        try:
            batches = await asyncio.gather(*[self._run_batch(b) for b in self.build()])
        except Exception as e:
            self.logger.error(f"SUITE {self.name} - aborted: {e}")
            raise

        count = 0
        for results in batches:
            for result in results:
                await self.bus.put(result)
                count += 1
                if not result.passed:
                    self.logger.warning(
                        f"SUITE {self.name} - {result.name} {result.status.value} (residual={result.residual:.3e})"
                    )
        self.logger.info(f"SUITE {self.name} - {count} checks in {time_s() - t0:.2f}s")
        return count

    @staticmethod
    def batch(fn: Callable[..., Sequence[CheckResult]], *args, **kwargs) -> Callable[[], List[CheckResult]]:
        return partial(_as_list, fn, *args, **kwargs)

    @staticmethod
    def tagged(tag: str, batches: List[Callable[[], List[CheckResult]]]) -> List[Callable[[], List[CheckResult]]]:
        """Suffixes check names with `[tag]`, e.g. the n or fixture a batch ran on."""
        return [partial(_tag_names, tag, b) for b in batches]


def _tag_names(tag: str, batch: Callable[[], List[CheckResult]]) -> List[CheckResult]:
    return [replace(r, name=f"{r.name}[{tag}]") for r in batch()]


def _as_list(fn: Callable[..., Sequence[CheckResult]], *args, **kwargs) -> List[CheckResult]:
    out = fn(*args, **kwargs)
    if isinstance(out, CheckResult):
        return [out]
    return list(out)
