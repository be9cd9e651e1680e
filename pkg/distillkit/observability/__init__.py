"""
Observability - Logging

structlog configuration and per-run JSONL event logs.
"""

from .logging import configure_logging
from .run_log import RunLog, read_run_log

__all__ = [
    'configure_logging',
    'RunLog',
    'read_run_log',
]
