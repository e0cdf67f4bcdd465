import logging
import sys
from functools import lru_cache

import structlog

"""
Configure a custom logger.
"""


def setup_logging(level: str = "INFO", quiet: bool = False) -> None:
    """
    Configure structlog to emit JSON records on stderr.
    stdout is reserved for command reports.
    """
    log_level = logging.WARNING if quiet else logging.getLevelName(level.upper())
    if not isinstance(log_level, int):
        log_level = logging.INFO

    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=log_level,
    )

    structlog.configure(
        processors=[
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.add_log_level,
            structlog.processors.dict_tracebacks,
            structlog.processors.JSONRenderer()
        ],
        wrapper_class=structlog.make_filtering_bound_logger(log_level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        context_class=dict,
        cache_logger_on_first_use=False,
    )


@lru_cache
def get_logger():
    """
    Returns a cached singleton instance of a pre-configured logger.
    """
    return structlog.get_logger()
