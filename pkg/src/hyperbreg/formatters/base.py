"""Abstract base formatter for experiment reports."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List


@dataclass
class ExperimentReport:
    """Tabular result of one command with a short summary."""
    command: str
    header: List[str]
    rows: List[List[Any]]
    summary: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValueError(
                    f"Row {row} has {len(row)} values, header has {len(self.header)} columns"
                )

    def column(self, name: str) -> List[Any]:
        """All values of one column."""
        index = self.header.index(name)
        return [row[index] for row in self.rows]


class BaseFormatter(ABC):
    """Abstract base for output formatters."""

    @abstractmethod
    def format_report(self, report: ExperimentReport) -> str:
        """Format an experiment report."""
        pass

    @abstractmethod
    def format_error(self, error: Exception) -> str:
        """Format error messages."""
        pass

    def truncate_text(self, text: str, max_length: int = 100) -> str:
        """Truncate text to maximum length."""
        if len(text) <= max_length:
            return text
        return text[:max_length - 3] + "..."
