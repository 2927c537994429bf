from dataclasses import dataclass
from typing import List


@dataclass
class FileLogConfig:
    filepath: str = "einstein_lab_log.txt"
    buffer_size: int = 10
    flush_interval: int = 10

    def validate(self) -> None:
        if not self.filepath or not self.filepath.endswith(".txt"):
            raise ValueError("Missing/Invalid filepath.")
        if self.buffer_size <= 0:
            raise ValueError("Buffer size must be greater than 0")
        if self.flush_interval <= 0:
            raise ValueError("Flush interval must be greater than 0")


class FileLogHandler:
    def __init__(self, config: FileLogConfig) -> None:
        self.filepath = config.filepath
        self.log_file = open(config.filepath, "a")
        self.buffer_size = config.buffer_size
        self.flush_interval = config.flush_interval

    def write(self, buffer: List[str]) -> None:
        if not buffer or self.log_file.closed:
            return
        self.log_file.write("\n".join(buffer) + "\n")
        self.log_file.flush()

    async def flush(self, buffer: List[str]) -> None:
        self.write(buffer)

    def close(self) -> None:
        if not self.log_file.closed:
            self.log_file.close()
