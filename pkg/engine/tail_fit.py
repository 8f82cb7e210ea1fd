"""
Tail Fitting
Maximum likelihood for both tail models and KS-based cutoff selection

Functions take a SizeSample or any array of positive sizes; arrays are
sorted on entry so bootstrap replicates can skip model validation.
"""

import math
from typing import Callable, Iterable, Optional, Tuple, Union

import numpy as np
from scipy import optimize, special

from base.config import AnalysisConfig
from base.errors import DegenerateTailError, DomainError, InsufficientTailError
from base.logger import Logger
from models.fits import LogNormalTailFit, ParetoTailFit
from models.panel import SizeSample

SampleLike = Union[SizeSample, np.ndarray, Iterable[float]]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def sorted_values(sample: SampleLike) -> np.ndarray:
    """Ascending float array of a sample"""
    if isinstance(sample, SizeSample):
        return sample.values
    return np.sort(np.asarray(sample, dtype=float))


def tail_values(sample: SampleLike, s_min: float) -> np.ndarray:
    """Sorted sizes s >= s_min"""
    values = sorted_values(sample)
    return values[np.searchsorted(values, s_min, side='left'):]


def _ks_distance(model_cdf: np.ndarray) -> float:
    """
    Two-sided KS distance of sorted tail points against model CDF values

    The empirical CDF is right-continuous; each point is compared with the
    step value on both sides, i/m and (i-1)/m.
    """
    m = model_cdf.size
    ranks = np.arange(1, m + 1, dtype=float)
    above = np.max(ranks / m - model_cdf)
    below = np.max(model_cdf - (ranks - 1.0) / m)
    return float(min(max(above, below, 0.0), 1.0))


def _fit_pareto_tail(tail: np.ndarray, s_min: float) -> Tuple[float, float]:
    """Conditional MLE ζ̂ = m / Σ ln(s_i/s_min) and its KS distance"""
    log_ratio = np.log(tail / s_min)
    total = float(np.sum(log_ratio))
    if not total > 0.0:
        raise DegenerateTailError(f"all {tail.size} tail points equal s_min={s_min}; ζ̂ diverges")
    zeta = tail.size / total
    model_cdf = -np.expm1(-zeta * log_ratio)
    return zeta, _ks_distance(model_cdf)


# ==================== Power Law ====================

def fit_pareto_given_smin(sample: SampleLike, s_min: float) -> ParetoTailFit:
    """
    Power-law MLE for a fixed cutoff

    Args:
        sample: Sizes
        s_min: Cutoff (> 0)

    Returns:
        ParetoTailFit with the KS distance against the fitted model

    Raises:
        InsufficientTailError: Fewer than 2 points >= s_min
        DegenerateTailError: Every tail point equals s_min
    """
    if not s_min > 0:
        raise DomainError(f"s_min must be positive, got {s_min}")
    tail = tail_values(sample, s_min)
    min_points = AnalysisConfig.get('tail_fit', 'pareto_min_points')
    if tail.size < min_points:
        raise InsufficientTailError(
            f"{tail.size} point(s) >= s_min={s_min}; need at least {min_points}", n_tail=tail.size
        )
    zeta, distance = _fit_pareto_tail(tail, float(s_min))
    return ParetoTailFit(zeta_hat=zeta, s_min=float(s_min), n_tail=int(tail.size), ks_distance=distance)


def ks_statistic(sample: SampleLike, model_ccdf: Callable, s_min: float) -> float:
    """
    KS distance between the tail's empirical CDF and a model CDF

    Args:
        sample: Sizes
        model_ccdf: Vectorized survival function of the model
        s_min: Cutoff restricting and renormalizing the empirical CDF

    Returns:
        D in [0, 1]

    Raises:
        InsufficientTailError: No point >= s_min
    """
    tail = tail_values(sample, s_min)
    if tail.size == 0:
        raise InsufficientTailError(f"no point >= s_min={s_min}", n_tail=0)
    model_cdf = 1.0 - np.asarray(model_ccdf(tail), dtype=float)
    return _ks_distance(model_cdf)


def scan_smin(
    sample: SampleLike,
    candidates: Optional[Iterable[float]] = None,
    min_tail_points: Optional[int] = None
) -> ParetoTailFit:
    """
    Choose the cutoff minimizing the KS distance of the conditional power-law fit

    Args:
        sample: Sizes
        candidates: Cutoffs to try; defaults to every distinct sample value
        min_tail_points: Tail-size floor per candidate (defaults from config)

    Returns:
        ParetoTailFit at the minimizing cutoff; ties go to the smaller cutoff

    Raises:
        InsufficientTailError: Sample smaller than the floor, or no candidate leaves it
        DegenerateTailError: Every admissible candidate has a constant tail
    """
    floor = int(AnalysisConfig.get('tail_fit', 'min_tail_points') if min_tail_points is None else min_tail_points)
    if floor < 1:
        raise DomainError(f"min_tail_points must be at least 1, got {floor}")
    values = sorted_values(sample)
    n = values.size
    if n < floor:
        raise InsufficientTailError(f"sample has {n} point(s); the scan needs at least {floor}", n_tail=n)

    if candidates is None:
        cutoffs, first_index = np.unique(values, return_index=True)
    else:
        cutoffs = np.unique(np.asarray(list(candidates), dtype=float))
        if np.any(~(cutoffs > 0)):
            raise DomainError("candidate cutoffs must be positive")
        first_index = np.searchsorted(values, cutoffs, side='left')

    admissible = (n - first_index) >= floor
    cutoffs, first_index = cutoffs[admissible], first_index[admissible]
    if cutoffs.size == 0:
        raise InsufficientTailError(f"no candidate cutoff leaves at least {floor} tail points")

    best = None
    for s_min, start in zip(cutoffs.tolist(), first_index.tolist()):
        try:
            zeta, distance = _fit_pareto_tail(values[start:], s_min)
        except DegenerateTailError:
            continue
        if best is None or distance < best[3]:
            best = (s_min, n - start, zeta, distance)

    if best is None:
        raise DegenerateTailError("every candidate cutoff leaves a constant tail")

    s_min, n_tail, zeta, distance = best
    Logger.debug(f"scan_smin: {cutoffs.size} candidates, s_min={s_min:.6g}, "
                 f"n_tail={n_tail}, zeta={zeta:.4f}, D={distance:.5f}")
    return ParetoTailFit(zeta_hat=zeta, s_min=s_min, n_tail=int(n_tail), ks_distance=distance)


def pareto_log_likelihood(tail: np.ndarray, zeta: float, s_min: float) -> float:
    """Σ ln p(s_i) under the power law for sorted tail points"""
    return float(tail.size * math.log(zeta / s_min) - (zeta + 1.0) * np.sum(np.log(tail / s_min)))


# ==================== Truncated Log-Normal ====================

def lognormal_log_likelihood(tail: np.ndarray, mu: float, sigma: float, s_min: float) -> float:
    """Σ ln p(s_i) under the log-normal truncated below at s_min (0 = untruncated)"""
    log_tail = np.log(tail)
    z = (log_tail - mu) / sigma
    log_mass = special.log_ndtr((mu - math.log(s_min)) / sigma) if s_min > 0 else 0.0
    return float(-np.sum(log_tail)
                 - tail.size * (math.log(sigma) + _LOG_SQRT_2PI + log_mass)
                 - 0.5 * np.dot(z, z))


def fit_lognormal_tail(
    sample: SampleLike,
    s_min: float,
    max_iterations: Optional[int] = None,
    xatol: Optional[float] = None
) -> LogNormalTailFit:
    """
    Truncated log-normal MLE for a given cutoff

    Nelder-Mead over (μ, ln σ), started from the moments of ln s on the tail
    and from that point shifted by -σ; the better optimum wins.

    Args:
        sample: Positive sizes
        s_min: Truncation point (0 fits the plain log-normal)
        max_iterations: Iteration cap per start (default from config)
        xatol: Simplex size at which a start counts as converged (default from config)

    Returns:
        LogNormalTailFit; converged is False when the cap was reached

    Raises:
        InsufficientTailError: Fewer than 3 points >= s_min
        DegenerateTailError: All tail points equal
    """
    if not s_min >= 0:
        raise DomainError(f"s_min must be non-negative, got {s_min}")
    optimizer = AnalysisConfig.section('optimizer')
    max_iterations = int(optimizer['max_iterations'] if max_iterations is None else max_iterations)
    xatol = float(optimizer['xatol'] if xatol is None else xatol)
    if max_iterations < 1:
        raise DomainError(f"max_iterations must be at least 1, got {max_iterations}")
    if not xatol > 0:
        raise DomainError(f"xatol must be positive, got {xatol}")

    tail = tail_values(sample, s_min)
    min_points = AnalysisConfig.get('tail_fit', 'lognormal_min_points')
    if tail.size < min_points:
        raise InsufficientTailError(
            f"{tail.size} point(s) >= s_min={s_min}; need at least {min_points}", n_tail=tail.size
        )

    log_tail = np.log(tail)
    spread = float(np.std(log_tail))
    if spread == 0.0:
        raise DegenerateTailError(f"all {tail.size} tail points are equal")

    m = tail.size

    def negative_log_likelihood(theta):
        mu, log_sigma = theta
        sigma = math.exp(log_sigma) if log_sigma <= 700.0 else math.inf
        if not 0.0 < sigma < math.inf:
            return math.inf
        with np.errstate(over='ignore'):
            value = -lognormal_log_likelihood(tail, float(mu), sigma, float(s_min))
        return value if math.isfinite(value) else math.inf

    mean_log = float(np.mean(log_tail))
    step_mu = optimizer['initial_step_mu_fraction'] * spread
    step_log_sigma = optimizer['initial_step_log_sigma']
    starts = [(mean_log, math.log(spread)), (mean_log - spread, math.log(spread))]

    best = None
    for start in starts:
        x0 = np.asarray(start, dtype=float)
        simplex = np.vstack([x0, x0 + (step_mu, 0.0), x0 + (0.0, step_log_sigma)])
        result = optimize.minimize(
            negative_log_likelihood, x0, method=optimizer['method'],
            options={'initial_simplex': simplex, 'xatol': xatol, 'fatol': math.inf,
                     'maxiter': max_iterations}
        )
        Logger.debug(f"fit_lognormal_tail: start=({start[0]:.4f}, {start[1]:.4f}) "
                     f"status={result.status} nit={result.nit} nll={result.fun:.6f}")
        if best is None or result.fun < best.fun:
            best = result

    mu_hat, log_sigma_hat = (float(v) for v in best.x)
    converged = bool(best.status == 0)
    if not converged:
        Logger.warning(f"fit_lognormal_tail: no convergence after {best.nit} iterations "
                       f"(s_min={s_min}, n_tail={m})")
    return LogNormalTailFit(
        mu_hat=mu_hat,
        sigma_hat=math.exp(log_sigma_hat),
        s_min=float(s_min),
        n_tail=int(m),
        log_likelihood=-float(best.fun),
        converged=converged,
        iterations=int(best.nit)
    )
