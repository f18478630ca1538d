"""
Shared logging utilities for the isolab command line and scripts.
Provides one logging configuration for every entry point.
"""
import logging
import os

from isolab.shared.constants import Defaults, EnvironmentVariables


def setup_logging(level: str | None = None) -> logging.Logger:
    """Setup root logging on stderr so rendered reports keep stdout to themselves"""
    level_name = (level or os.environ.get(EnvironmentVariables.LOG_LEVEL, Defaults.LOG_LEVEL)).upper()
    numeric_level = logging.getLevelName(level_name)
    if not isinstance(numeric_level, int):
        numeric_level = logging.WARNING

    logger = logging.getLogger()
    logger.setLevel(numeric_level)

    # Clear any existing handlers (pytest and repeated CLI calls install some)
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)

    handler = logging.StreamHandler()
    handler.setLevel(numeric_level)
    handler.setFormatter(logging.Formatter(Defaults.LOG_FORMAT))
    logger.addHandler(handler)

    return logger
