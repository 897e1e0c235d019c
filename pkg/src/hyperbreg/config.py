"""Configuration manager for hyperbreg."""

import argparse
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError
from pydantic import field_validator, model_validator

from .utils.exceptions import ValidationError
from .utils.helpers import merge_dicts, safe_yaml_load
from .utils.logging import LOG_FORMATS, get_logger


COMMANDS = ("solve", "derivatives", "compat", "frechet-test", "convergence", "energy")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
LOG_FORMAT_NAMES = tuple(LOG_FORMATS)
MAX_LEVEL = 4


class ExperimentConfig(BaseModel):
    """Validated experiment description."""
    model_config = ConfigDict(extra="forbid")

    command: Literal["solve", "derivatives", "compat", "frechet-test", "convergence", "energy"]
    case: str = "static-sine"
    k: int = Field(0, ge=0, le=MAX_LEVEL)
    mesh_sizes: List[int]
    step_counts: List[int]
    lin_tol: float = Field(1e-10, gt=0.0, le=1e-4)
    eps_list: List[float] = Field(default_factory=lambda: [1e-1, 3e-2, 1e-2])
    T: float = Field(1.0, gt=0.0)
    perturbation: str = "sin(pi*x)*(1+t)"
    threads: int = Field(1, ge=1)
    format: Literal["table", "json"] = "table"
    log_level: str = "ERROR"
    log_format: Literal["structured", "plain"] = "structured"

    # Inline case
    coefficient: Optional[str] = None
    lower_bound: Optional[float] = Field(None, gt=0.0)
    exact: Optional[str] = None
    forcing: Optional[str] = None
    initial_displacement: Optional[str] = None
    initial_velocity: Optional[str] = None

    @field_validator("mesh_sizes", "step_counts")
    @classmethod
    def _positive_counts(cls, values: List[int], info) -> List[int]:
        if not values:
            raise ValueError(f"{info.field_name} must not be empty")
        if any(v < 1 for v in values):
            raise ValueError(f"{info.field_name} entries must be positive, got {values}")
        return values

    @field_validator("eps_list")
    @classmethod
    def _decreasing_eps(cls, values: List[float]) -> List[float]:
        if len(values) < 3:
            raise ValueError("eps_list needs at least 3 entries")
        if any(v <= 0.0 for v in values) or any(b >= a for a, b in zip(values, values[1:])):
            raise ValueError(f"eps_list must be positive and decreasing, got {values}")
        return values

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        if value.upper() not in LOG_LEVELS:
            raise ValueError(f"log_level must be one of: {', '.join(LOG_LEVELS)}")
        return value.upper()

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        n_mesh, n_steps = len(self.mesh_sizes), len(self.step_counts)
        if n_mesh != n_steps and 1 not in (n_mesh, n_steps):
            raise ValueError(
                f"mesh_sizes ({n_mesh}) and step_counts ({n_steps}) must have equal length "
                "or one of them a single entry"
            )
        if self.case == "inline" and (self.coefficient is None or self.lower_bound is None):
            raise ValueError("inline case needs 'coefficient' and 'lower_bound'")
        return self

    def sweep_pairs(self) -> List[Tuple[int, int]]:
        """(m, N) pairs, a single entry broadcasting against the other list."""
        count = max(len(self.mesh_sizes), len(self.step_counts))
        meshes = self.mesh_sizes * count if len(self.mesh_sizes) == 1 else self.mesh_sizes
        steps = self.step_counts * count if len(self.step_counts) == 1 else self.step_counts
        return list(zip(meshes, steps))


class ConfigManager:
    """Handles configuration from defaults, config file, environment and CLI args."""

    def __init__(self):
        self.logger = get_logger()

    def load_config(self, args: argparse.Namespace) -> ExperimentConfig:
        """Load configuration from multiple sources."""
        config = self._get_default_config()

        file_config = self._load_file_config(getattr(args, "config", None))
        env_config = self._load_env_config()
        cli_config = self._args_to_config(args)

        # Later sources take precedence
        config = merge_dicts(config, file_config)
        config = merge_dicts(config, env_config)
        config = merge_dicts(config, cli_config)

        experiment = self.validate_config(config)
        self.logger.debug(f"Loaded configuration: {experiment.model_dump()}")
        return experiment

    def validate_config(self, config: Dict[str, Any]) -> ExperimentConfig:
        """Validate the merged dictionary into an ExperimentConfig."""
        try:
            return ExperimentConfig.model_validate(config)
        except PydanticValidationError as e:
            problems = [
                f"{'.'.join(str(part) for part in err['loc']) or 'config'}: {err['msg']}"
                for err in e.errors()
            ]
            raise ValidationError(f"Invalid configuration: {'; '.join(problems)}",
                                  {"errors": problems})

    def resolve_log_level(self, args: argparse.Namespace) -> str:
        """CLI flag, then HYPERBREG_LOG_LEVEL, then ERROR."""
        level = getattr(args, "log_level", None) or os.getenv("HYPERBREG_LOG_LEVEL") or "ERROR"
        return level.upper()

    def resolve_log_format(self, args: argparse.Namespace) -> str:
        """CLI flag, then HYPERBREG_LOG_FORMAT, then structured."""
        return (getattr(args, "log_format", None) or os.getenv("HYPERBREG_LOG_FORMAT")
                or "structured").lower()

    def _get_default_config(self) -> Dict[str, Any]:
        """Get default configuration values."""
        return {
            "case": "static-sine",
            "k": 0,
            "lin_tol": 1e-10,
            "eps_list": [1e-1, 3e-2, 1e-2],
            "T": 1.0,
            "perturbation": "sin(pi*x)*(1+t)",
            "threads": min(4, os.cpu_count() or 1),
            "format": "table",
            "log_level": "ERROR",
            "log_format": "structured",
        }

    def _load_file_config(self, path: Optional[str]) -> Dict[str, Any]:
        """Load the YAML experiment file."""
        if not path:
            return {}
        config_path = Path(path)
        if not config_path.is_file():
            raise ValidationError(f"Config file not found: {path}")
        return safe_yaml_load(config_path.read_text(encoding="utf-8"))

    def _load_env_config(self) -> Dict[str, Any]:
        """Load configuration from environment variables."""
        config = {}

        threads = os.getenv("HYPERBREG_THREADS")
        if threads:
            try:
                config["threads"] = int(threads)
            except ValueError:
                self.logger.warning(f"Invalid HYPERBREG_THREADS value: {threads}")

        log_level = os.getenv("HYPERBREG_LOG_LEVEL")
        if log_level:
            config["log_level"] = log_level

        log_format = os.getenv("HYPERBREG_LOG_FORMAT")
        if log_format:
            config["log_format"] = log_format.lower()

        return config

    def _args_to_config(self, args: argparse.Namespace) -> Dict[str, Any]:
        """Convert argparse Namespace to configuration dictionary."""
        config = {}

        arg_mappings = {
            "command": "command",
            "k": "k",
            "lin_tol": "lin_tol",
            "format": "format",
            "log_level": "log_level",
            "log_format": "log_format",
        }

        for arg_name, config_key in arg_mappings.items():
            if hasattr(args, arg_name):
                value = getattr(args, arg_name)
                if value is not None:
                    config[config_key] = value

        return config
