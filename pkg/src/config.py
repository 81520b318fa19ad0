"""
Configuration management for the gathering toolkit.

Handles environment variables for logging, artifact output and default
simulation and sweep limits. Every setting has a default.
"""

import os
from dataclasses import dataclass
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class Config:
    """Application configuration loaded from environment variables."""

    # Logging Configuration
    log_level: str = "INFO"
    log_dir: str = "logs"

    # Artifacts
    output_dir: str = "artifacts"

    # Simulation and sweep defaults
    horizon_epochs: int = 12
    max_multiplicity: int = 3
    sweep_workers: int = 1
    max_sweep_instances: int = 200_000

    def __init__(self):
        """Initialize configuration from environment variables."""
        self.log_level = os.getenv("LOG_LEVEL", "INFO").upper()
        self.log_dir = os.getenv("LOG_DIR", "logs")
        self.output_dir = os.getenv("OUTPUT_DIR", "artifacts")

        self._errors = []
        self.horizon_epochs = self._int_setting("HORIZON_EPOCHS", 12)
        self.max_multiplicity = self._int_setting("MAX_MULTIPLICITY", 3)
        self.sweep_workers = self._int_setting("SWEEP_WORKERS", 1)
        self.max_sweep_instances = self._int_setting("MAX_SWEEP_INSTANCES", 200_000)

        self._validate_config()

    def _int_setting(self, name: str, default: int) -> int:
        raw = os.getenv(name)
        if raw is None or not raw.strip():
            return default
        try:
            value = int(raw)
        except ValueError:
            self._errors.append(f"{name} must be an integer, got '{raw}'")
            return default
        if value < 1:
            self._errors.append(f"{name} must be positive, got {value}")
        return value

    def _validate_config(self):
        """Validate settings; errors raise, warnings are printed."""
        errors = list(self._errors)
        warnings = []

        if self.log_level not in LOG_LEVELS:
            errors.append(f"LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}")

        if self.max_multiplicity > 3:
            warnings.append("MAX_MULTIPLICITY above 3 adds no new cases and slows sweeps")

        cpus = os.cpu_count() or 1
        if self.sweep_workers > cpus:
            warnings.append(f"SWEEP_WORKERS={self.sweep_workers} exceeds the {cpus} available CPUs")

        if errors:
            raise ValueError(f"Configuration errors: {', '.join(errors)}")

        if warnings:
            print(f"⚠️  Configuration warnings: {'; '.join(warnings)}")

    def __repr__(self) -> str:
        return (
            f"Config(log_level='{self.log_level}', "
            f"output_dir='{self.output_dir}', "
            f"horizon_epochs={self.horizon_epochs}, "
            f"max_multiplicity={self.max_multiplicity}, "
            f"sweep_workers={self.sweep_workers})"
        )
