import asyncio

import pytest

from src.utils.logging.handlers.file import FileLogConfig
from src.utils.logging.logger import Logger, LoggerConfig


def test_sync_logger_buffers_until_error(tmp_path):
    path = tmp_path / "lab_log.txt"
    logger = Logger(LoggerConfig(base_level="INFO", stout=False, max_buffer_size=5), FileLogConfig(filepath=str(path)))
    assert not logger.is_async
    logger.debug("SUITE algebra - hidden")
    logger.info("SUITE algebra - started")
    assert path.read_text() == ""
    logger.error("SUITE algebra - aborted")
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert lines[0].endswith(" - INFO - SUITE algebra - started")
    assert lines[1].endswith(" - ERROR - SUITE algebra - aborted")
    logger.close()


def test_sync_logger_flushes_when_full(tmp_path):
    path = tmp_path / "lab_log.txt"
    logger = Logger(LoggerConfig(base_level="DEBUG", stout=False, max_buffer_size=2), FileLogConfig(filepath=str(path)))
    logger.debug("one")
    logger.debug("two")
    assert len(path.read_text().splitlines()) == 2
    logger.close()


def test_async_logger_drains_on_shutdown(tmp_path):
    path = tmp_path / "lab_log.txt"

    async def scenario():
        logger = Logger(LoggerConfig(base_level="DEBUG", stout=False), FileLogConfig(filepath=str(path)))
        assert logger.is_async
        loop = asyncio.get_running_loop()
        for k in range(3):
            logger.debug(f"SUITE chart - entry {k}")
        await loop.run_in_executor(None, logger.info, "SUITE chart - from worker")
        await logger.shutdown()
        logger.info("SUITE chart - after shutdown")

    asyncio.run(scenario())
    lines = path.read_text().splitlines()
    assert len(lines) == 4
    assert lines[-1].endswith("from worker")


def test_config_validation():
    with pytest.raises(ValueError):
        LoggerConfig(base_level="LOUD").validate()
    with pytest.raises(ValueError):
        LoggerConfig(max_buffer_size=0).validate()
    with pytest.raises(ValueError):
        FileLogConfig(filepath="lab.log").validate()
    with pytest.raises(ValueError):
        FileLogConfig(flush_interval=0).validate()
