"""
Models - Pydantic Schemas

Configuration and search budgets, the qsf-1 state document and the report-1
output document.
"""

from .qsf import FactorDocument, QSFDocument
from .report import REPORT_SCHEMA, ErrorDetail, ErrorReport, InputDescriptor, Report
from .settings import (
    DecideSettings,
    NegdetSettings,
    ProductSearchBudget,
    SearchBudget,
    Settings,
    TolerancePolicy,
)

__all__ = [
    'DecideSettings',
    'ErrorDetail',
    'ErrorReport',
    'FactorDocument',
    'InputDescriptor',
    'NegdetSettings',
    'ProductSearchBudget',
    'QSFDocument',
    'REPORT_SCHEMA',
    'Report',
    'SearchBudget',
    'Settings',
    'TolerancePolicy',
]
