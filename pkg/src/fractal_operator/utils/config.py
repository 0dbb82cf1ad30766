"""
Configuration utilities for the fractal operator tools.
"""
import logging
import os
from pathlib import Path
from typing import Dict, Optional, Union

from dotenv import load_dotenv
from pydantic import ValidationError

from ..models.settings import (
    DEFAULT_BURN_IN,
    DEFAULT_ENDPOINT_TOL,
    DEFAULT_GRID_LEVEL,
    DEFAULT_HOELDER_SUBSAMPLE,
    DEFAULT_MAX_ITER,
    DEFAULT_NEUMANN_MAX_TERMS,
    DEFAULT_NEUMANN_TOL,
    DEFAULT_SEED,
    DEFAULT_TOL,
    SolverSettings,
)

logger = logging.getLogger(__name__)

ENV_DEFAULTS: Dict[str, str] = {
    "FRACTAL_GRID_LEVEL": str(DEFAULT_GRID_LEVEL),
    "FRACTAL_TOL": repr(DEFAULT_TOL),
    "FRACTAL_MAX_ITER": str(DEFAULT_MAX_ITER),
    "FRACTAL_ENDPOINT_TOL": repr(DEFAULT_ENDPOINT_TOL),
    "FRACTAL_HOELDER_SUBSAMPLE": str(DEFAULT_HOELDER_SUBSAMPLE),
    "FRACTAL_NEUMANN_TOL": repr(DEFAULT_NEUMANN_TOL),
    "FRACTAL_NEUMANN_MAX_TERMS": str(DEFAULT_NEUMANN_MAX_TERMS),
    "FRACTAL_BURN_IN": str(DEFAULT_BURN_IN),
    "FRACTAL_SEED": str(DEFAULT_SEED),
    "FRACTAL_LOG_LEVEL": "WARNING",
}


class Config:
    """Configuration manager reading FRACTAL_* variables from the environment."""

    def __init__(self, env_file: Optional[Union[str, Path]] = None):
        """Load an optional .env file; existing environment variables win."""
        if env_file:
            load_dotenv(env_file)
        else:
            load_dotenv()

    def _get(self, name: str) -> str:
        return os.getenv(name, ENV_DEFAULTS[name])

    @property
    def grid_level(self) -> int:
        return int(self._get("FRACTAL_GRID_LEVEL"))

    @property
    def tol(self) -> float:
        return float(self._get("FRACTAL_TOL"))

    @property
    def max_iter(self) -> int:
        return int(self._get("FRACTAL_MAX_ITER"))

    @property
    def endpoint_tol(self) -> float:
        return float(self._get("FRACTAL_ENDPOINT_TOL"))

    @property
    def hoelder_subsample(self) -> int:
        return int(self._get("FRACTAL_HOELDER_SUBSAMPLE"))

    @property
    def neumann_tol(self) -> float:
        return float(self._get("FRACTAL_NEUMANN_TOL"))

    @property
    def neumann_max_terms(self) -> int:
        return int(self._get("FRACTAL_NEUMANN_MAX_TERMS"))

    @property
    def burn_in(self) -> int:
        return int(self._get("FRACTAL_BURN_IN"))

    @property
    def seed(self) -> int:
        return int(self._get("FRACTAL_SEED"))

    @property
    def log_level(self) -> str:
        return self._get("FRACTAL_LOG_LEVEL").upper()

    @property
    def solver_settings(self) -> SolverSettings:
        """Numeric settings from the environment."""
        return SolverSettings(
            grid_level=self.grid_level,
            tol=self.tol,
            max_iter=self.max_iter,
            endpoint_tol=self.endpoint_tol,
            hoelder_subsample=self.hoelder_subsample,
            neumann_tol=self.neumann_tol,
            neumann_max_terms=self.neumann_max_terms,
            burn_in=self.burn_in,
            seed=self.seed,
        )

    def validate(self) -> bool:
        """Check that every setting parses and lies in range."""
        try:
            _ = self.solver_settings
            if self.log_level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
                raise ValueError(f"unknown log level {self.log_level!r}")
            return True
        except (ValueError, ValidationError) as e:
            logger.error("configuration validation failed: %s", e)
            return False

    def as_dict(self) -> Dict[str, str]:
        """Effective values of every FRACTAL_* setting."""
        return {name: self._get(name) for name in ENV_DEFAULTS}


def create_sample_env_file(path: Union[str, Path] = ".env.example") -> Path:
    """Write a sample .env file listing every setting with its default."""
    lines = ["# Fractal operator configuration"]
    lines.extend(f"{name}={value}" for name, value in ENV_DEFAULTS.items())
    target = Path(path)
    target.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("sample environment file written to %s", target)
    return target
