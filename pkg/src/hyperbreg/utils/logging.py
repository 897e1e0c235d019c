"""Logging for hyperbreg: the package logger with a single stderr handler."""

import logging
import sys
from typing import Optional

from .exceptions import ValidationError


LOG_FORMATS = {
    "structured": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    "plain": "%(levelname)s: %(message)s",
}


class LoggingManager:
    """Owns the ``hyperbreg`` logger and its handler."""

    def __init__(self, name: str = "hyperbreg"):
        self.logger = logging.getLogger(name)
        self.handler: Optional[logging.StreamHandler] = None

    def setup_logging(self, level: str, format_type: str = "structured") -> None:
        """Set level and line format; repeated calls retarget the same handler."""
        if format_type not in LOG_FORMATS:
            raise ValidationError(
                f"Unknown log format '{format_type}', expected one of: {', '.join(LOG_FORMATS)}",
                {"format": format_type},
            )

        if self.handler is None:
            self.logger.handlers.clear()
            self.handler = logging.StreamHandler(sys.stderr)
            self.logger.addHandler(self.handler)
            # Reports own stdout
            self.logger.propagate = False
        else:
            self.handler.setStream(sys.stderr)

        self.handler.setFormatter(logging.Formatter(LOG_FORMATS[format_type]))
        self.configure_log_level(level)

    def configure_log_level(self, level: str) -> None:
        """Set DEBUG, INFO, WARNING or ERROR; unknown names fall back to ERROR."""
        value = logging.getLevelName(level.upper())
        self.logger.setLevel(value if isinstance(value, int) else logging.ERROR)

    def get_logger(self) -> logging.Logger:
        return self.logger


logging_manager = LoggingManager()


def get_logger() -> logging.Logger:
    """The package logger."""
    return logging_manager.get_logger()
