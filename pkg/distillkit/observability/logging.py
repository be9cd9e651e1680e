"""
Logging Configuration

Configures structlog once per process. Log lines are JSON on stderr so that
stdout stays reserved for reports.
"""

import logging
import sys

import structlog


def configure_logging(level: str = "WARNING") -> None:
    """
    Configure structlog with JSON output to stderr

    Args:
        level: Minimum level name (DEBUG, INFO, WARNING, ERROR)
    """
    numeric = getattr(logging, level.upper(), logging.WARNING)
    structlog.configure(
        processors=[
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer()
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
