"""
Suites - Property Verification

Seeded property suites behind `distillkit verify`. Importing this package
registers every suite.
"""

from . import classical, distillation, structural
from .registry import ALL_SUITES, SUITES, SuiteResult, run_suite

__all__ = [
    'ALL_SUITES',
    'SUITES',
    'SuiteResult',
    'classical',
    'distillation',
    'run_suite',
    'structural',
]
