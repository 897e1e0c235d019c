"""Main CLI interface for hyperbreg."""

import argparse
import sys
from typing import List

from .config import COMMANDS, LOG_FORMAT_NAMES, LOG_LEVELS, ConfigManager, ExperimentConfig
from .experiments import ExperimentRunner
from .formatters.base import BaseFormatter
from .formatters.csv import CSVFormatter
from .formatters.json import JSONFormatter
from .formatters.table import TableFormatter
from .utils.exceptions import HyperbregException, ValidationError
from .utils.logging import get_logger, logging_manager


EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_VALIDATION = 2
EXIT_INTERRUPTED = 130


class HyperbregCLI:
    """Main CLI interface using argparse."""

    def __init__(self):
        self.config_manager = ConfigManager()
        self.csv_formatter = CSVFormatter()
        self.logger = None  # Set once logging is configured

    def setup_parser(self) -> argparse.ArgumentParser:
        """Configure command-line argument parser."""
        parser = argparse.ArgumentParser(
            prog="hyperbreg",
            description="hyperbreg - Galerkin solves, derivative levels and energy reports "
                        "for second-order hyperbolic equations",
            formatter_class=argparse.RawDescriptionHelpFormatter,
            epilog="""
Examples:
  # Forward solves over a mesh/step sweep
  hyperbreg solve --config sweep.yaml --out results/

  # Time derivatives of the solution up to level 2
  hyperbreg derivatives --config case.yaml --out results/ --k 2

  # Compatible initial values only
  hyperbreg compat --config case.yaml --out results/ --k 3

  # Taylor remainder test of the coefficient-to-state derivative
  hyperbreg frechet-test --config case.yaml --out results/

  # Convergence table with observed orders, JSON summary
  hyperbreg convergence --config ladder.yaml --out results/ --format json
            """
        )

        parser.add_argument(
            "command",
            choices=COMMANDS,
            help="Experiment to run"
        )

        parser.add_argument(
            "--config",
            required=True,
            help="YAML experiment file"
        )

        parser.add_argument(
            "--out",
            required=True,
            help="Directory receiving report.csv"
        )

        parser.add_argument(
            "--k",
            type=int,
            help="Derivative level (overrides config)"
        )

        parser.add_argument(
            "--lin-tol",
            type=float,
            dest="lin_tol",
            help="Linear solve tolerance (overrides config)"
        )

        parser.add_argument(
            "--format",
            choices=["table", "json"],
            help="Console summary format (default: table)"
        )

        parser.add_argument(
            "--log-level",
            choices=list(LOG_LEVELS),
            help="Set logging level (default: ERROR)"
        )

        parser.add_argument(
            "--log-format",
            choices=list(LOG_FORMAT_NAMES),
            help="Log line layout on stderr (default: structured)"
        )

        return parser

    def parse_arguments(self, args: List[str]) -> argparse.Namespace:
        """Parse and validate command-line arguments."""
        parser = self.setup_parser()
        parsed_args = parser.parse_args(args)

        self.validate_arguments(parsed_args)

        return parsed_args

    def validate_arguments(self, args: argparse.Namespace) -> None:
        """Validate argument values that argparse cannot check."""
        if args.k is not None and not 0 <= args.k <= 4:
            raise ValidationError(f"--k must be between 0 and 4, got {args.k}")

        if args.lin_tol is not None and not 0.0 < args.lin_tol <= 1e-4:
            raise ValidationError(f"--lin-tol must lie in (0, 1e-4], got {args.lin_tol}")

    async def execute_command(self, args: argparse.Namespace) -> int:
        """Execute the requested command and return exit code."""
        try:
            logging_manager.setup_logging(
                self.config_manager.resolve_log_level(args),
                self.config_manager.resolve_log_format(args),
            )
            self.logger = get_logger()

            config = self.config_manager.load_config(args)
            runner = ExperimentRunner(config)
            report = await runner.run()

            # Only a complete report reaches the output directory
            target = self.csv_formatter.write_report(report, args.out)
            self.logger.info(f"Wrote {target}")

            print(self._create_formatter(config).format_report(report))
            return EXIT_OK

        except KeyboardInterrupt:
            if self.logger:
                self.logger.info("Operation cancelled by user")
            return EXIT_INTERRUPTED
        except ValidationError as e:
            self._report_error(f"Validation error: {e}")
            return EXIT_VALIDATION
        except HyperbregException as e:
            self._report_error(f"Solver error: {e}")
            return EXIT_SOLVER
        except Exception as e:
            self._report_error(f"Unexpected error: {e}")
            return EXIT_SOLVER

    def _report_error(self, message: str) -> None:
        if self.logger:
            self.logger.error(message)
        else:
            print(message, file=sys.stderr)

    def _create_formatter(self, config: ExperimentConfig) -> BaseFormatter:
        """Create console formatter based on config."""
        if config.format == "json":
            return JSONFormatter(pretty_print=True)
        return TableFormatter(use_colors=True)
