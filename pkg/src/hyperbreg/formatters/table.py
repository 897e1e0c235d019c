"""Human-readable table formatting using rich."""

import io
from typing import Any, Dict

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from .base import BaseFormatter, ExperimentReport
from ..utils.helpers import extract_error_details, safe_json_dumps


class TableFormatter(BaseFormatter):
    """Console summary of an experiment."""

    def __init__(self, use_colors: bool = True):
        """Initialize table formatter with color option."""
        self.use_colors = use_colors

    def _console(self, output: io.StringIO) -> Console:
        return Console(file=output, width=120, color_system="auto" if self.use_colors else None)

    def format_report(self, report: ExperimentReport) -> str:
        """Summary panel followed by the report rows."""
        output = io.StringIO()
        console = self._console(output)

        console.print(self._create_summary_panel(report.command, report.summary))
        console.print()

        table = Table(title=f"hyperbreg {report.command}", box=box.ROUNDED)
        for index, name in enumerate(report.header):
            table.add_column(name, style="bold bright_blue" if index == 0 else "bright_white",
                             justify="right")
        for row in report.rows:
            table.add_row(*[self._cell(value) for value in row])
        console.print(table)

        return output.getvalue()

    def format_error(self, error: Exception) -> str:
        """Format error messages with rich styling."""
        output = io.StringIO()
        console = self._console(output)

        error_details = extract_error_details(error)

        error_text = f"[bold red]{error_details['type']}[/bold red]\n"
        error_text += f"[red]{error_details['message']}[/red]"

        if error_details.get('details'):
            error_text += f"\n\n[dim]Details:[/dim]\n{safe_json_dumps(error_details['details'], pretty=True)}"

        console.print(Panel(error_text, title="Error", border_style="red"))
        return output.getvalue()

    def _create_summary_panel(self, command: str, summary: Dict[str, Any]) -> Panel:
        lines = [f"[bold green]{command}[/bold green]"]
        for key, value in summary.items():
            lines.append(f"  {key}: [bright_yellow]{self._cell(value)}[/bright_yellow]")
        return Panel("\n".join(lines), title="Summary", border_style="green")

    def _cell(self, value: Any) -> str:
        if isinstance(value, float):
            return f"{value:.4e}"
        return self.truncate_text(str(value), 60)
