"""JSON output formatting."""

from typing import Any

from .base import BaseFormatter, ExperimentReport
from ..utils.helpers import extract_error_details, safe_json_dumps


class JSONFormatter(BaseFormatter):
    """JSON output formatting."""

    def __init__(self, pretty_print: bool = True):
        """Initialize JSON formatter with pretty-print option."""
        self.pretty_print = pretty_print

    def format_report(self, report: ExperimentReport) -> str:
        """Report rows keyed by column name, plus the summary."""
        output = {
            "command": report.command,
            "summary": report.summary,
            "rows": [dict(zip(report.header, row)) for row in report.rows],
        }
        return self._format_json(output)

    def format_error(self, error: Exception) -> str:
        """Format error messages as JSON."""
        error_data = {
            "error": extract_error_details(error),
            "success": False
        }
        return self._format_json(error_data)

    def _format_json(self, data: Any) -> str:
        return safe_json_dumps(data, pretty=self.pretty_print)
