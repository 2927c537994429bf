from dataclasses import dataclass
from typing import List, Optional
import asyncio
import sys
import threading

from src.utils.misc_utils import time_s, time_iso8601
from .handlers.file import FileLogConfig, FileLogHandler

LOG_LEVEL_MAP = {10: "DEBUG", 20: "INFO", 30: "WARNING", 40: "ERROR", 50: "CRITICAL"}

LOG_LEVELS = {10, 20, 30, 40, 50}

@dataclass
class LoggerConfig:
    """
    Core configuration for the Logger.

    Parameters
    ----------
    base_level : str
        The minimum log level to record. Default is "WARNING".

    stout : bool
        Whether to echo logs to the console (stderr, so reports on stdout stay
        machine readable). Default is True.

    max_buffer_size : int
        Maximum number of log messages to buffer. Default is 10.

    max_buffer_age : int
        Maximum age (in seconds) before flushing the buffer. Default is 10.
    """

    base_level: str = "WARNING"
    stout: bool = True
    max_buffer_size: int = 10
    max_buffer_age: int = 10

    def validate(self) -> None:
        if self.base_level not in LOG_LEVEL_MAP.values():
            raise ValueError(f"Invalid base log level name: {self.base_level}")
        if self.max_buffer_size < 1:
            raise ValueError("Max buffer size must be positive.")
        if self.max_buffer_age < 1:
            raise ValueError("Max buffer age must be positive.")

class Logger:
    """
    Buffered logger feeding the file handler.

    Inside a running event loop entries go through an asyncio.Queue drained by
    an ingestor task; worker threads submit with call_soon_threadsafe. Without
    a loop (library use, tests) entries are buffered synchronously under a lock.
    """

    def __init__(
        self,
        logger_config: Optional[LoggerConfig] = None,
        file_config: Optional[FileLogConfig] = None,
    ) -> None:

        self.logger_config = logger_config if logger_config else LoggerConfig()
        self.logger_config.validate()

        self.log_message_buffer: List[str] = []
        self.current_buffer_size = 0
        self.last_flush_time = time_s()

        self._base_level = self._get_log_level(self.logger_config.base_level)
        self._stout = self.logger_config.stout
        self._max_buffer_size = self.logger_config.max_buffer_size
        self._max_buffer_age = self.logger_config.max_buffer_age

        self._log_handlers: List[FileLogHandler] = []

        if file_config:
            file_config.validate()
            self._log_handlers.append(FileLogHandler(file_config))

        self._lock = threading.Lock()
        self._shutdown_flag = False
        self._queue: Optional[asyncio.Queue] = None
        self._ingestor: Optional[asyncio.Task] = None

        try:
            self._ev_loop: Optional[asyncio.AbstractEventLoop] = asyncio.get_running_loop()
        except RuntimeError:
            self._ev_loop = None

        if self._ev_loop is not None:
            self._queue = asyncio.Queue()
            self._ingestor = self._ev_loop.create_task(self._log_ingestor())

    @property
    def is_async(self) -> bool:
        return self._ingestor is not None

    def _get_log_level(self, level_name: str) -> int:
        """
        Converts a log level name to its corresponding integer value.

        Parameters
        ----------
        level_name : str
            The name of the log level (e.g., "DEBUG", "INFO").

        Returns
        -------
        int
            The integer value of the log level.
        """
        for level, name in LOG_LEVEL_MAP.items():
            if name == level_name:
                return level

    def _take_buffer(self) -> List[str]:
        out = list(self.log_message_buffer)
        self.log_message_buffer.clear()
        self.current_buffer_size = 0
        self.last_flush_time = time_s()
        return out

    def _buffer_entry(self, log_entry: str, level: int) -> bool:
        """Appends an entry and tells whether the buffer is due for a flush."""
        self.log_message_buffer.append(log_entry)
        self.current_buffer_size += 1

        if self._stout:
            print(log_entry, file=sys.stderr)

        # Immediate flush for ERROR or CRITICAL levels
        if level >= 40:
            return True

        is_buffer_full = self.current_buffer_size >= self._max_buffer_size
        is_buffer_old = time_s() - self.last_flush_time >= self._max_buffer_age
        return is_buffer_full or is_buffer_old

    async def _flush_buffer(self) -> None:
        """
        Flushes the log message buffer to all handlers.
        """
        buffer = self._take_buffer()
        for handler in self._log_handlers:
            await handler.flush(buffer)

    def _flush_sync(self) -> None:
        buffer = self._take_buffer()
        for handler in self._log_handlers:
            handler.write(buffer)

    async def _log_ingestor(self) -> None:
        """
        Asynchronous loop that processes log messages from the queue.

        A None item is the shutdown sentinel; entries queued before it are
        still written.
        """
        while True:
            item = await self._queue.get()
            try:
                if item is None:
                    await self._flush_buffer()
                    return
                log_entry, level = item
                if self._buffer_entry(log_entry, level):
                    await self._flush_buffer()
            except Exception as e:
                raise Exception(f"Log writer loop: {e}") from e
            finally:
                self._queue.task_done()

    def _submit_log(self, level: int, message: str) -> None:
        if level < self._base_level or self._shutdown_flag:
            return
        log_entry = f"{time_iso8601()} - {LOG_LEVEL_MAP[level]} - {message}"
        try:
            if self.is_async:
                self._ev_loop.call_soon_threadsafe(self._queue.put_nowait, (log_entry, level))
            else:
                with self._lock:
                    if self._buffer_entry(log_entry, level):
                        self._flush_sync()
        except Exception as e:
            raise Exception(f"Failed to submit log: {e}") from e

    def debug(self, message: str) -> None:
        self._submit_log(10, message)

    def info(self, message: str) -> None:
        self._submit_log(20, message)

    def warning(self, message: str) -> None:
        self._submit_log(30, message)

    def error(self, message: str) -> None:
        self._submit_log(40, message)

    def critical(self, message: str) -> None:
        self._submit_log(50, message)

    async def shutdown(self) -> None:
        """Drains the queue, flushes the buffer and closes the handlers."""
        if self.is_async and not self._shutdown_flag:
            self._shutdown_flag = True
            # behind any entries already scheduled from worker threads
            self._ev_loop.call_soon(self._queue.put_nowait, None)
            await self._ingestor
        self.close()

    def close(self) -> None:
        self._shutdown_flag = True
        with self._lock:
            self._flush_sync()
        for handler in self._log_handlers:
            handler.close()
