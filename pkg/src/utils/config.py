"""
Configuration Management

This module handles configuration loading and validation for corners-lab.
"""

import os
import logging
from typing import Optional, Dict, Any
from pathlib import Path
from dotenv import load_dotenv

from utils.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = Path(__file__).resolve().parents[2] / "config" / "thresholds.json"

VALID_LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')
VALID_OUTPUT_FORMATS = ('csv', 'json')


class Config:
    """Configuration management class."""

    def __init__(self, env_file: Optional[str] = None, **overrides: Any):
        """
        Initialize configuration from environment variables.

        Args:
            env_file: Optional path to .env file
            **overrides: Attribute values that win over the environment (used by the CLI flags)
        """
        if env_file and Path(env_file).exists():
            load_dotenv(env_file)
        else:
            load_dotenv()

        try:
            # Reproducibility
            self.SEED = int(os.getenv('CORNERS_LAB_SEED', '0'))
            self.WORKERS = int(os.getenv('CORNERS_LAB_WORKERS', '1'))

            # Quadrature and Monte Carlo
            self.QUAD_ORDER = int(os.getenv('CORNERS_LAB_QUAD_ORDER', '40'))
            self.QUAD_TOL = float(os.getenv('CORNERS_LAB_QUAD_TOL', '1e-8'))
            self.MC_SAMPLES = int(os.getenv('CORNERS_LAB_MC_SAMPLES', '100000'))
            self.NODE_BUDGET = int(os.getenv('CORNERS_LAB_NODE_BUDGET', '2000000'))

            # Verification
            self.SIGNIFICANCE = float(os.getenv('CORNERS_LAB_SIGNIFICANCE', '0.01'))
            self.THRESHOLDS = os.getenv('CORNERS_LAB_THRESHOLDS', str(DEFAULT_THRESHOLDS))
        except ValueError as e:
            raise ConfigError(f"Configuration validation failed:\n- {e}") from e

        # Application Settings
        self.LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()
        self.LOG_DIR = os.getenv('LOG_DIR') or None
        self.OUTPUT_FORMAT = os.getenv('CORNERS_LAB_OUTPUT_FORMAT', 'csv').lower()

        for key, value in overrides.items():
            if value is None:
                continue
            attr = key.upper()
            if not hasattr(self, attr):
                raise ConfigError(f"Unknown configuration key: {key}")
            setattr(self, attr, value)

        self._validate_config()

        logger.info("Configuration loaded successfully")

    def _validate_config(self):
        """Validate critical configuration settings."""
        errors = []

        if self.SEED < 0:
            errors.append("CORNERS_LAB_SEED must be a nonnegative integer")

        if self.WORKERS < 1:
            errors.append("CORNERS_LAB_WORKERS must be at least 1")

        if self.QUAD_ORDER < 4:
            errors.append("CORNERS_LAB_QUAD_ORDER must be at least 4")

        if self.QUAD_TOL <= 0:
            errors.append("CORNERS_LAB_QUAD_TOL must be positive")

        if self.MC_SAMPLES < 100:
            errors.append("CORNERS_LAB_MC_SAMPLES must be at least 100")

        if self.NODE_BUDGET < 1000:
            errors.append("CORNERS_LAB_NODE_BUDGET must be at least 1000")

        if not 0.0 < self.SIGNIFICANCE < 1.0:
            errors.append("CORNERS_LAB_SIGNIFICANCE must be between 0.0 and 1.0")

        if self.LOG_LEVEL not in VALID_LOG_LEVELS:
            errors.append(f"LOG_LEVEL must be one of {', '.join(VALID_LOG_LEVELS)}")

        if self.OUTPUT_FORMAT not in VALID_OUTPUT_FORMATS:
            errors.append("CORNERS_LAB_OUTPUT_FORMAT must be csv or json")

        if not Path(self.THRESHOLDS).exists():
            logger.warning(f"Threshold manifest does not exist: {self.THRESHOLDS}")

        if errors:
            error_msg = "Configuration validation failed:\n" + "\n".join(f"- {error}" for error in errors)
            logger.error(error_msg)
            raise ConfigError(error_msg)

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            'SEED': self.SEED,
            'WORKERS': self.WORKERS,
            'QUAD_ORDER': self.QUAD_ORDER,
            'QUAD_TOL': self.QUAD_TOL,
            'MC_SAMPLES': self.MC_SAMPLES,
            'NODE_BUDGET': self.NODE_BUDGET,
            'SIGNIFICANCE': self.SIGNIFICANCE,
            'THRESHOLDS': self.THRESHOLDS,
            'LOG_LEVEL': self.LOG_LEVEL,
            'LOG_DIR': self.LOG_DIR,
            'OUTPUT_FORMAT': self.OUTPUT_FORMAT,
        }

    def __repr__(self) -> str:
        """String representation of configuration."""
        return f"Config({self.to_dict()})"
