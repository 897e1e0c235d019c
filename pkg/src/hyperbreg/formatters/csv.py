"""Deterministic CSV report formatting."""

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Any, Union

from .base import BaseFormatter, ExperimentReport
from ..utils.helpers import extract_error_details, format_float


REPORT_NAME = "report.csv"


class CSVFormatter(BaseFormatter):
    """Comma separated, LF terminated, 12 significant digits."""

    def format_report(self, report: ExperimentReport) -> str:
        """Render header and rows in input order."""
        output = io.StringIO()
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(report.header)
        for row in report.rows:
            writer.writerow([self.format_value(value) for value in row])
        return output.getvalue()

    def format_error(self, error: Exception) -> str:
        details = extract_error_details(error)
        output = io.StringIO()
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(["type", "message"])
        writer.writerow([details["type"], details["message"]])
        return output.getvalue()

    def format_value(self, value: Any) -> str:
        if isinstance(value, bool):
            return str(value).lower()
        if isinstance(value, int):
            return str(value)
        if isinstance(value, float):
            return format_float(value)
        try:
            return format_float(float(value))
        except (TypeError, ValueError):
            return str(value)

    def write_report(self, report: ExperimentReport, out_dir: Union[str, Path]) -> Path:
        """Write report.csv atomically through a temporary file in out_dir."""
        directory = Path(out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        target = directory / REPORT_NAME
        text = self.format_report(report)

        fd, temp_name = tempfile.mkstemp(prefix=".report-", suffix=".csv", dir=directory)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            os.replace(temp_name, target)
        except BaseException:
            if os.path.exists(temp_name):
                os.unlink(temp_name)
            raise
        return target
