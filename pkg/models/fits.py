"""
Fit Models
Pydantic models for fitted tails, goodness-of-fit and model comparison results
"""

import math
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.distributions import LogNormalTail, ParetoTail
from models.types import ReplicateMode


class ParetoTailFit(BaseModel):
    """Power-law fit: ζ̂, cutoff, tail count and KS distance D"""
    model_config = ConfigDict(frozen=True)

    zeta_hat: float = Field(gt=0, allow_inf_nan=False)
    s_min: float = Field(gt=0, allow_inf_nan=False)
    n_tail: int = Field(ge=2)
    ks_distance: float = Field(ge=0, le=1)

    def model(self) -> ParetoTail:
        return ParetoTail(zeta=self.zeta_hat, s_min=self.s_min)


class LogNormalTailFit(BaseModel):
    """Truncated log-normal maximum likelihood fit at a given cutoff"""
    model_config = ConfigDict(frozen=True)

    mu_hat: float = Field(allow_inf_nan=False)
    sigma_hat: float = Field(gt=0, allow_inf_nan=False)
    s_min: float = Field(ge=0, allow_inf_nan=False)
    n_tail: int = Field(ge=3)
    log_likelihood: float
    converged: bool
    iterations: int = Field(ge=0)

    def model(self) -> LogNormalTail:
        return LogNormalTail(mu=self.mu_hat, sigma=self.sigma_hat, s_min=self.s_min)


class ReplicateSummary(BaseModel):
    """Min / median / max of replicate KS distances"""
    model_config = ConfigDict(frozen=True)

    min: float
    median: float
    max: float


class GofResult(BaseModel):
    """
    Monte Carlo goodness-of-fit result

    p_value = n_exceeding / n_replicates where n_replicates counts replicates
    that refitted successfully; excluded replicates are reported separately.
    """
    model_config = ConfigDict(frozen=True)

    p_value: float = Field(ge=0, le=1)
    n_replicates: int = Field(ge=1)
    n_requested: int = Field(ge=1)
    n_excluded: int = Field(ge=0)
    n_exceeding: int = Field(ge=0)
    d_empirical: float = Field(ge=0, le=1)
    master_seed: int = Field(ge=0, lt=2 ** 64)
    replicate_mode: ReplicateMode
    replicate_d_summary: ReplicateSummary
    # Kept in memory for recomputation; left out of serialized output
    replicate_distances: Tuple[float, ...] = Field(default=(), exclude=True, repr=False)

    @model_validator(mode='after')
    def _check_counts(self):
        if self.n_replicates + self.n_excluded != self.n_requested:
            raise ValueError("n_replicates + n_excluded must equal n_requested")
        if self.n_exceeding > self.n_replicates:
            raise ValueError("n_exceeding cannot exceed n_replicates")
        if self.p_value != self.n_exceeding / self.n_replicates:
            raise ValueError("p_value must equal n_exceeding / n_replicates")
        return self

    def p_value_at(self, d: float) -> float:
        """
        p-value the stored replicate set would give for another empirical distance

        Args:
            d: Empirical KS distance

        Returns:
            float: Fraction of replicate distances >= d
        """
        if not self.replicate_distances:
            raise ValueError("replicate distances were not retained")
        exceeding = sum(1 for value in self.replicate_distances if value >= d)
        return exceeding / len(self.replicate_distances)


class LikelihoodRatioResult(BaseModel):
    """
    Log-likelihood ratio R = ln L_PL - ln L_LN over the tail

    Negative values favor the log-normal.
    """
    model_config = ConfigDict(frozen=True)

    r_natural: float = Field(allow_inf_nan=False)
    r_base10: float = Field(allow_inf_nan=False)
    n_tail: int = Field(ge=1)
    pl_loglik: float = Field(allow_inf_nan=False)
    ln_loglik: float = Field(allow_inf_nan=False)
    s_min: float = Field(ge=0)

    @model_validator(mode='after')
    def _check_ratio(self):
        if self.r_natural != self.pl_loglik - self.ln_loglik:
            raise ValueError("r_natural must equal pl_loglik - ln_loglik")
        if self.r_base10 != self.r_natural / math.log(10):
            raise ValueError("r_base10 must equal r_natural / ln 10")
        return self

    @property
    def favors_lognormal(self) -> bool:
        return self.r_natural < 0
