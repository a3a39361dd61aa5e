"""
Logging Utilities Module

Thin helpers around the standard logging package so every module obtains its
logger the same way.
"""

import logging
from typing import Optional

ROOT_LOGGER_NAME = "aspect_iot"
LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    Get a logger nested under the package root logger.

    Args:
        name: Module or class name (e.g. ``__name__``); None returns the root logger

    Returns:
        Logger instance
    """
    if not name:
        return logging.getLogger(ROOT_LOGGER_NAME)
    if name.startswith("src."):
        name = name[len("src."):]
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")


def configure_logging(verbosity: int = 0) -> None:
    """
    Configure the package root logger for command-line use.

    Args:
        verbosity: 0 = WARNING, 1 = INFO, 2 or more = DEBUG
    """
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.WARNING

    root = logging.getLogger(ROOT_LOGGER_NAME)
    root.setLevel(level)
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
    else:
        for handler in root.handlers:
            handler.setLevel(level)
