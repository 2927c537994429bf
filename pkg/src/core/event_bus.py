from dataclasses import replace
from typing import Dict, List
import asyncio

from src.core.events import CheckResult


class ResultBus:
    def __init__(self, maxsize: int = 0) -> None:
        self._queue = asyncio.Queue(maxsize=maxsize)
        self._last_id = 0
        self._closed = False

    def _next_id(self) -> int:
        self._last_id += 1
        return self._last_id

    async def put(self, result: CheckResult) -> int:
        if self._closed:
            raise RuntimeError("Queue is closed")
        seq_id = self._next_id()
        await self._queue.put(replace(result, seq_id=seq_id))
        return seq_id

    async def get(self) -> CheckResult:
        return await self._queue.get()

    def empty(self) -> bool:
        return self._queue.empty()

    def close(self) -> None:
        self._closed = True

    def drain(self) -> List[CheckResult]:
        out = []
        while not self._queue.empty():
            out.append(self._queue.get_nowait())
        return out


class UnknownSuiteError(KeyError):
    pass


class MultiResultBus:
    def __init__(self, suites: List[str], maxsize: int = 0) -> None:
        self._queues: Dict[str, ResultBus] = {}

        for suite in suites:
            self._queues[suite] = ResultBus(maxsize=maxsize)

    def _bus(self, suite: str) -> ResultBus:
        if suite not in self._queues:
            raise UnknownSuiteError(f"Unknown suite: {suite}")
        return self._queues[suite]

    async def put(self, result: CheckResult) -> int:
        return await self._bus(result.suite).put(result)

    async def get(self, suite: str) -> CheckResult:
        return await self._bus(suite).get()

    def empty(self, suite: str) -> bool:
        return self._bus(suite).empty()

    def close(self, suite: str) -> None:
        self._bus(suite).close()

    def drain(self, suite: str) -> List[CheckResult]:
        return self._bus(suite).drain()

    def keys(self) -> List[str]:
        return list(self._queues.keys())
