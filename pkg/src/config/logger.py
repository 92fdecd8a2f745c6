import logging
import sys
from typing import Optional

from config.config import config

FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

_lab_loggers = set()


def _level(name: Optional[str]) -> int:
    return getattr(logging, (name or config.LOG_LEVEL).upper(), logging.INFO)


def setup_logger(name: Optional[str] = None, level: Optional[str] = None) -> logging.Logger:
    """
    Sets up and returns a configured logger instance.

    Args:
        name: Logger name (typically __name__ from the calling module)
        level: Level name overriding LOG_LEVEL

    Returns:
        Configured logger instance, writing to stderr
    """
    logger = logging.getLogger(name or "qlab")
    _lab_loggers.add(logger.name)

    # Avoid adding multiple handlers if logger already exists
    if logger.handlers:
        return logger

    log_level = _level(level)
    logger.setLevel(log_level)

    # stdout is reserved for the JSON report
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(logging.Formatter(FORMAT, datefmt=DATE_FORMAT))
    logger.addHandler(console_handler)

    return logger


def set_log_level(level: str) -> None:
    """Changes the level of every logger created through setup_logger."""
    log_level = _level(level)
    for name in _lab_loggers:
        logger = logging.getLogger(name)
        logger.setLevel(log_level)
        for handler in logger.handlers:
            handler.setLevel(log_level)
