"""
Utils Package

Contains logging helpers and upload handling.
"""

from .logging_utils import configure_logging, get_logger

__all__ = ['configure_logging', 'get_logger']
