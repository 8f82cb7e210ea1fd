"""
Analysis Configuration Module
Loads pipeline defaults from config/defaults.json and environment overrides
"""

import json
import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict

from dotenv import load_dotenv

from base.errors import ConfigError

# Load environment variables from .env file if it exists
load_dotenv()


class AnalysisConfig:
    """Configuration class for pipeline defaults and runtime settings"""

    DEFAULTS_PATH = Path(__file__).parent.parent / 'config' / 'defaults.json'

    # Environment overrides
    WORKERS_ENV = 'FUNDTAILS_WORKERS'
    LOG_DIR_ENV = 'FUNDTAILS_LOG_DIR'

    @classmethod
    @lru_cache(maxsize=1)
    def load_defaults(cls) -> Dict[str, Any]:
        """
        Read config/defaults.json

        Returns:
            dict: Parsed defaults

        Raises:
            ConfigError: If the file is missing or not valid JSON
        """
        try:
            with open(cls.DEFAULTS_PATH, 'r', encoding='utf-8') as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read defaults from {cls.DEFAULTS_PATH}: {e}") from e

    @classmethod
    def section(cls, name: str) -> Dict[str, Any]:
        """
        Get one section of the defaults

        Args:
            name: Section name (pipeline, tail_fit, optimizer, figures, schemas, panel)

        Returns:
            dict: Section contents
        """
        defaults = cls.load_defaults()
        if name not in defaults:
            raise ConfigError(f"Defaults have no section '{name}'")
        return defaults[name]

    @classmethod
    def get(cls, section: str, key: str) -> Any:
        values = cls.section(section)
        if key not in values:
            raise ConfigError(f"Defaults section '{section}' has no key '{key}'")
        return values[key]

    @classmethod
    def default_workers(cls) -> int:
        """
        Worker count default, overridable by FUNDTAILS_WORKERS

        Returns:
            int: Positive worker count
        """
        raw = os.getenv(cls.WORKERS_ENV)
        if raw is None or raw.strip() == '':
            return int(cls.get('pipeline', 'worker_count'))
        try:
            workers = int(raw)
        except ValueError as e:
            raise ConfigError(f"{cls.WORKERS_ENV} must be an integer, got '{raw}'") from e
        if workers < 1:
            raise ConfigError(f"{cls.WORKERS_ENV} must be at least 1, got {workers}")
        return workers

    @classmethod
    def default_log_dir(cls):
        return os.getenv(cls.LOG_DIR_ENV) or None
