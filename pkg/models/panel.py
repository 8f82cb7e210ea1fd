"""
Panel Models
Pydantic models for fund records, CPI tables, dated size samples and yearly rows
"""

import math
import re
from datetime import date
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from base.config import AnalysisConfig
from models.types import LogBase, ReplicateMode

MONTH_PATTERN = re.compile(r"^(\d{4})-(0[1-9]|1[0-2])$")


def parse_month(value: str) -> str:
    """
    Validate a calendar year-month string

    Args:
        value: 'YYYY-MM'

    Returns:
        str: The same string, stripped

    Raises:
        ValueError: If the format is wrong
    """
    text = str(value).strip()
    if not MONTH_PATTERN.match(text):
        raise ValueError(f"month must be YYYY-MM, got '{value}'")
    return text


def current_month() -> str:
    today = date.today()
    return f"{today.year:04d}-{today.month:02d}"


def month_year(month: str) -> int:
    return int(month[:4])


class FundRecord(BaseModel):
    """One fund-month observation; tasm in millions (nominal until adjusted)"""
    model_config = ConfigDict(frozen=True)

    fund_id: str = Field(min_length=1)
    month: str
    tasm: float = Field(ge=0, allow_inf_nan=False)
    nav: Optional[float] = Field(default=None, ge=0, allow_inf_nan=False)
    equity_fraction: float = Field(ge=0, le=1, allow_inf_nan=False)

    @field_validator('month')
    @classmethod
    def _check_month(cls, value: str) -> str:
        month = parse_month(value)
        earliest = AnalysisConfig.get('panel', 'earliest_month')
        if month < earliest or month > current_month():
            raise ValueError(f"month {month} outside [{earliest}, {current_month()}]")
        return month

    @property
    def year(self) -> int:
        return month_year(self.month)


class CpiTable(BaseModel):
    """Consumer price index by month with the month all sizes are expressed in"""
    model_config = ConfigDict(frozen=True)

    index: Dict[str, float]
    base_month: str = "2007-07"

    @field_validator('index')
    @classmethod
    def _check_index(cls, value: Dict[str, float]) -> Dict[str, float]:
        checked = {}
        for month, level in value.items():
            if not (level > 0 and math.isfinite(level)):
                raise ValueError(f"CPI index for {month} must be positive, got {level}")
            checked[parse_month(month)] = float(level)
        return checked

    @model_validator(mode='after')
    def _check_base(self):
        parse_month(self.base_month)
        if self.base_month not in self.index:
            raise ValueError(f"base month {self.base_month} missing from CPI table")
        return self

    def ratio(self, month: str) -> float:
        """cpi[base_month] / cpi[month]; KeyError if the month is absent"""
        return self.index[self.base_month] / self.index[month]


class SizeSample(BaseModel):
    """
    Cross-section of positive sizes (millions, July-2007 units), sorted ascending

    source_count is the number of records the sample was drawn from before
    zero sizes were removed; excluded_zero counts those removals.
    """
    model_config = ConfigDict(frozen=True)

    as_of: Optional[str] = None
    sizes: List[float]
    source_count: int = Field(default=0, ge=0)
    excluded_zero: int = Field(default=0, ge=0)

    @field_validator('sizes')
    @classmethod
    def _check_sizes(cls, value: List[float]) -> List[float]:
        if any(not (s > 0 and math.isfinite(s)) for s in value):
            raise ValueError("sizes must be positive and finite")
        return sorted(value)

    @model_validator(mode='before')
    @classmethod
    def _default_source_count(cls, data):
        if isinstance(data, dict) and 'source_count' not in data:
            data = dict(data)
            data['source_count'] = len(data.get('sizes') or []) + int(data.get('excluded_zero', 0))
        return data

    @model_validator(mode='after')
    def _check_source_count(self):
        if self.source_count < len(self.sizes) + self.excluded_zero:
            raise ValueError("source_count cannot be below the retained plus excluded sizes")
        return self

    @classmethod
    def from_values(cls, values, as_of: Optional[str] = None) -> "SizeSample":
        """Build a sample from any iterable or array of sizes"""
        return cls(as_of=as_of, sizes=np.asarray(values, dtype=float).tolist())

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.sizes, dtype=float)

    def __len__(self) -> int:
        return len(self.sizes)


class SummaryStats(BaseModel):
    """Size moments of one cross-section (partial yearly row)"""
    model_config = ConfigDict(frozen=True)

    n_funds: int = Field(ge=1)
    mean_size: float             # millions
    std_size: float = Field(ge=0)       # billions
    mean_log_size: float
    std_log_size: float = Field(ge=0)
    log_base: LogBase = LogBase.NATURAL


class YearlySummaryRow(BaseModel):
    """
    One column of the yearly table

    Aliases are the emitted table column names. Numeric fields are None in
    rows flagged invalid for stages that did not complete.
    """
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    year: int
    n_funds: Optional[int] = Field(default=None, alias='N', ge=0)
    mean_size: Optional[float] = Field(default=None, alias='E_s_millions')
    std_size: Optional[float] = Field(default=None, alias='Std_s_billions', ge=0)
    mean_log_size: Optional[float] = Field(default=None, alias='E_omega')
    std_log_size: Optional[float] = Field(default=None, alias='Std_omega', ge=0)
    zeta: Optional[float] = None
    s_min: Optional[float] = None
    n_tail: Optional[int] = Field(default=None, alias='N_tail', ge=0)
    p_value: Optional[float] = Field(default=None, ge=0, le=1)
    r_base10: Optional[float] = Field(default=None, alias='R_log10')
    replicate_mode: ReplicateMode
    seed: int = Field(ge=0)
    valid: bool

    @model_validator(mode='after')
    def _check_tail_count(self):
        if self.n_tail is not None and self.n_funds is not None and self.n_tail > self.n_funds:
            raise ValueError("n_tail cannot exceed n_funds")
        return self
