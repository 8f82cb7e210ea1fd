"""
Models package
Pydantic models for data validation and serialization
"""

from models.distributions import ParetoTail, LogNormalTail
from models.fits import (
    ParetoTailFit,
    LogNormalTailFit,
    ReplicateSummary,
    GofResult,
    LikelihoodRatioResult
)
from models.panel import (
    FundRecord,
    CpiTable,
    SizeSample,
    SummaryStats,
    YearlySummaryRow
)
from models.figures import FigureSeries
from models.run_config import RunConfig

__all__ = [
    'ParetoTail',
    'LogNormalTail',
    'ParetoTailFit',
    'LogNormalTailFit',
    'ReplicateSummary',
    'GofResult',
    'LikelihoodRatioResult',
    'FundRecord',
    'CpiTable',
    'SizeSample',
    'SummaryStats',
    'YearlySummaryRow',
    'FigureSeries',
    'RunConfig',
]
