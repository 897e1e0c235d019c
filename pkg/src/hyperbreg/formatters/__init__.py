"""Output formatters for hyperbreg."""

from .base import BaseFormatter, ExperimentReport
from .csv import CSVFormatter
from .json import JSONFormatter
from .table import TableFormatter

__all__ = [
    "BaseFormatter",
    "CSVFormatter",
    "ExperimentReport",
    "JSONFormatter",
    "TableFormatter",
]
