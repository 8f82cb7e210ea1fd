"""
Distribution Models
Pydantic models for the two competing tail models

Sizes are in millions of July-2007 currency units.
"""

from pydantic import BaseModel, ConfigDict, Field


class ParetoTail(BaseModel):
    """
    Power law above a cutoff

    Density (ζ/s_min)(s/s_min)^-(ζ+1) on [s_min, ∞).
    """
    model_config = ConfigDict(frozen=True)

    zeta: float = Field(gt=0, allow_inf_nan=False)
    s_min: float = Field(gt=0, allow_inf_nan=False)


class LogNormalTail(BaseModel):
    """
    Log-normal restricted and renormalized to [s_min, ∞)

    s_min = 0 means the untruncated log-normal.
    """
    model_config = ConfigDict(frozen=True)

    mu: float = Field(allow_inf_nan=False)
    sigma: float = Field(gt=0, allow_inf_nan=False)
    s_min: float = Field(default=0.0, ge=0, allow_inf_nan=False)

    @property
    def is_truncated(self) -> bool:
        return self.s_min > 0
