"""
Base infrastructure components: logging, errors, configuration and stage tracking
"""

from .logger import Logger
from .errors import (
    FundTailsError,
    ConfigError,
    DataError,
    NumericalError
)
from .config import AnalysisConfig
from .stage_tracker import StageTracker

__all__ = [
    'Logger',
    'FundTailsError',
    'ConfigError',
    'DataError',
    'NumericalError',
    'AnalysisConfig',
    'StageTracker'
]
