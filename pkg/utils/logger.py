"""
Logging Utility
==============
Console logging shared by every pipeline component. Level comes from
SLAM_DEBUG / SLAM_LOG_LEVEL (see config/settings.py).
"""

import functools
import logging
import time

from config.settings import DEBUG_MODE, LOG_LEVEL

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def resolve_level(debug: bool = DEBUG_MODE, name: str = LOG_LEVEL) -> int:
    """Numeric level for the configured name; unknown names fall back to INFO."""
    if debug:
        return logging.DEBUG
    level = logging.getLevelName(name.upper())
    return level if isinstance(level, int) else logging.INFO


def setup_logger(name: str = "dynamic_slam") -> logging.Logger:
    """
    Get the named logger, attaching the console handler on first use.

    Args:
        name: Component name, usually the class name

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    level = resolve_level()
    handler = logging.StreamHandler()
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))

    logger.setLevel(level)
    logger.addHandler(handler)
    logger.propagate = False
    return logger


def log_execution_time(func):
    """Log how long a top-level command took, also when it raises."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        logger = setup_logger(func.__module__)
        started = time.perf_counter()
        try:
            result = func(*args, **kwargs)
        except Exception as e:
            logger.error(f"{func.__name__} failed after {time.perf_counter() - started:.2f}s: {e}")
            raise
        logger.info(f"{func.__name__} finished in {time.perf_counter() - started:.2f}s")
        return result

    return wrapper
