import json
import logging
from logging.handlers import RotatingFileHandler
import sys

LOGGER_NAME = "fairorder"
LOG_FILE_BYTES = 5_000_000
LOG_FILE_BACKUPS = 3

COLORS = {
    "DEBUG": "\033[36m",
    "INFO": "\033[32m",
    "WARNING": "\033[33m",
    "ERROR": "\033[31m",
    "CRITICAL": "\033[41m",
}
RESET = "\033[0m"


class JsonFormatter(logging.Formatter):
    """One JSON object per line: level, time, logger name, message."""

    def format(self, record):
        entry = {
            "level": record.levelname,
            "time": self.formatTime(record, "%Y-%m-%dT%H:%M:%S"),
            "name": record.name,
            "message": record.getMessage(),
        }
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry, ensure_ascii=False)


class ColorFormatter(logging.Formatter):
    def format(self, record):
        return f"{COLORS.get(record.levelname, '')}{super().format(record)}{RESET}"


def setup_logger(level: int = logging.INFO, log_file: str | None = None, json_format: bool = False):
    """
    Configure the `fairorder` logger that every module logs into.

    Args:
        level: Logging level (e.g. logging.DEBUG)
        log_file: Optional file that also receives the logs, rotated at LOG_FILE_BYTES
        json_format: If True, outputs logs as JSON lines
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)
    logger.propagate = False

    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    if json_format:
        formatter = JsonFormatter()
    else:
        formatter = ColorFormatter("%(asctime)s | %(levelname)-8s | %(name)s | %(message)s", "%H:%M:%S")

    # stderr keeps stdout free for command output
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(RotatingFileHandler(log_file, maxBytes=LOG_FILE_BYTES,
                                            backupCount=LOG_FILE_BACKUPS, encoding="utf-8"))
    for handler in handlers:
        handler.setFormatter(formatter)
        handler.setLevel(level)
        logger.addHandler(handler)
    return logger


def get_logger(component: str) -> logging.Logger:
    """Child logger `fairorder.<component>` for library modules."""
    return logging.getLogger(f"{LOGGER_NAME}.{component}")
