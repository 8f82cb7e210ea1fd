"""
Tail Distributions
Densities, tail functions, quantiles and samplers for the two competing tail models

All functions accept a scalar or a numpy array and return the same shape.
The truncated log-normal is evaluated through log-survival terms
ln(erfc(x/√2)/2) = log_ndtr(-x), so deep-tail ratios of erfc values never
underflow.
"""

import math
from typing import Callable, Union

import numpy as np
from scipy import optimize, special

from base.errors import DomainError
from models.distributions import LogNormalTail, ParetoTail

ArrayLike = Union[float, np.ndarray]
TailModel = Union[ParetoTail, LogNormalTail]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)
_NEWTON_STEPS = 3


def _as_array(values):
    arr = np.asarray(values, dtype=float)
    return arr, arr.ndim == 0


def _result(arr: np.ndarray, scalar: bool) -> ArrayLike:
    return float(arr) if scalar else arr


def _check_support(s: np.ndarray, s_min: float, name: str) -> None:
    if np.any(np.isnan(s)):
        raise DomainError(f"{name}: size is NaN")
    if np.any(s < s_min):
        raise DomainError(f"{name}: size below the cutoff s_min={s_min}")


def _check_probability(u: np.ndarray, name: str) -> None:
    if not np.all((u >= 0.0) & (u < 1.0)):
        raise DomainError(f"{name}: probability must lie in [0, 1)")


# ==================== Power Law ====================

def pareto_pdf(s: ArrayLike, model: ParetoTail) -> ArrayLike:
    """
    Power-law density (ζ/s_min)(s/s_min)^-(ζ+1)

    Args:
        s: Size(s) >= model.s_min
        model: Fitted or assumed power law

    Returns:
        Density value(s)

    Raises:
        DomainError: If any s < s_min
    """
    s_arr, scalar = _as_array(s)
    _check_support(s_arr, model.s_min, "pareto_pdf")
    ratio = s_arr / model.s_min
    return _result((model.zeta / model.s_min) * ratio ** -(model.zeta + 1.0), scalar)


def pareto_logpdf(s: ArrayLike, model: ParetoTail) -> ArrayLike:
    s_arr, scalar = _as_array(s)
    _check_support(s_arr, model.s_min, "pareto_logpdf")
    log_ratio = np.log(s_arr / model.s_min)
    return _result(math.log(model.zeta / model.s_min) - (model.zeta + 1.0) * log_ratio, scalar)


def pareto_ccdf(s: ArrayLike, model: ParetoTail) -> ArrayLike:
    """
    P(S > s) = (s/s_min)^-ζ, equal to 1 at the cutoff

    Args:
        s: Size(s) >= model.s_min
        model: Power law

    Returns:
        Survival probability
    """
    s_arr, scalar = _as_array(s)
    _check_support(s_arr, model.s_min, "pareto_ccdf")
    return _result((s_arr / model.s_min) ** -model.zeta, scalar)


def pareto_quantile(u: ArrayLike, model: ParetoTail) -> ArrayLike:
    """
    Inverse CDF s_min (1-u)^(-1/ζ)

    Args:
        u: Probability in [0, 1)
        model: Power law

    Returns:
        Size(s) with pareto_ccdf = 1 - u
    """
    u_arr, scalar = _as_array(u)
    _check_probability(u_arr, "pareto_quantile")
    return _result(model.s_min * (1.0 - u_arr) ** (-1.0 / model.zeta), scalar)


# ==================== Truncated Log-Normal ====================

def _log_upper(log_s, model: LogNormalTail):
    """ln P(Z > (ln s - μ)/σ) for a standard normal Z"""
    return special.log_ndtr((model.mu - log_s) / model.sigma)


def _log_mass_above_cutoff(model: LogNormalTail) -> float:
    if not model.is_truncated:
        return 0.0
    return float(_log_upper(math.log(model.s_min), model))


def _check_lognormal_support(s: np.ndarray, model: LogNormalTail, name: str) -> None:
    if np.any(~(s > 0)):
        raise DomainError(f"{name}: size must be positive")
    _check_support(s, model.s_min, name)


def lognormal_tail_logpdf(s: ArrayLike, model: LogNormalTail) -> ArrayLike:
    s_arr, scalar = _as_array(s)
    _check_lognormal_support(s_arr, model, "lognormal_tail_logpdf")
    log_s = np.log(s_arr)
    z = (log_s - model.mu) / model.sigma
    values = -log_s - math.log(model.sigma) - _LOG_SQRT_2PI - 0.5 * z * z - _log_mass_above_cutoff(model)
    return _result(values, scalar)


def lognormal_tail_pdf(s: ArrayLike, model: LogNormalTail) -> ArrayLike:
    """
    Log-normal density divided by its mass above s_min

    √(2/π) exp(-(ln s - μ)²/2σ²) / (s σ erfc((ln s_min - μ)/(√2 σ)))

    Args:
        s: Positive size(s) >= model.s_min
        model: Truncated log-normal (s_min = 0 for untruncated)

    Returns:
        Density value(s)
    """
    log_density = lognormal_tail_logpdf(s, model)
    return np.exp(log_density) if isinstance(log_density, np.ndarray) else math.exp(log_density)


def lognormal_tail_ccdf(s: ArrayLike, model: LogNormalTail) -> ArrayLike:
    """
    erfc((ln s - μ)/(√2σ)) / erfc((ln s_min - μ)/(√2σ)), equal to 1 at the cutoff

    Args:
        s: Positive size(s) >= model.s_min
        model: Truncated log-normal

    Returns:
        Survival probability
    """
    s_arr, scalar = _as_array(s)
    _check_lognormal_support(s_arr, model, "lognormal_tail_ccdf")
    values = np.exp(_log_upper(np.log(s_arr), model) - _log_mass_above_cutoff(model))
    return _result(np.minimum(values, 1.0), scalar)


def _bracketed_standard_quantile(log_target: float, model: LogNormalTail) -> float:
    """
    Solve ln P(Z > z) = log_target by bracketing

    Used when erfcinv cannot resolve the target (its argument underflows).
    """
    def excess(z):
        return special.log_ndtr(-z) - log_target

    lower = (math.log(model.s_min) - model.mu) / model.sigma if model.is_truncated else -40.0
    upper = max(lower, 0.0) + 1.0
    while excess(upper) > 0:
        upper = 2.0 * upper + 1.0
    return optimize.brentq(excess, lower, upper, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def _refine_upper_quantile(z: np.ndarray, log_target: np.ndarray) -> np.ndarray:
    """
    Newton steps on ln P(Z > z) = log_target for z > 0

    The step is (ln P(Z > z) - target) / hazard(z); below zero erfcinv is
    already exact to rounding and the hazard is too flat to step on.
    """
    upper = np.isfinite(z) & (z > 0.0)
    zu, target = z[upper], log_target[upper]
    for _ in range(_NEWTON_STEPS):
        log_tail = special.log_ndtr(-zu)
        log_hazard = -0.5 * zu * zu - _LOG_SQRT_2PI - log_tail
        zu = zu + (log_tail - target) * np.exp(-log_hazard)
    refined = z.copy()
    refined[upper] = zu
    return refined


def lognormal_tail_quantile(u: ArrayLike, model: LogNormalTail) -> ArrayLike:
    """
    Inverse CDF of the truncated log-normal

    Args:
        u: Probability in [0, 1); u = 0 is rejected for an untruncated model
        model: Truncated log-normal

    Returns:
        Size(s) s with lognormal_tail_ccdf(s) = 1 - u
    """
    u_arr, scalar = _as_array(u)
    _check_probability(u_arr, "lognormal_tail_quantile")
    if not model.is_truncated and np.any(u_arr == 0.0):
        raise DomainError("lognormal_tail_quantile: u = 0 has no finite quantile without truncation")

    log_target = np.log1p(-u_arr) + _log_mass_above_cutoff(model)
    erfc_value = 2.0 * np.exp(log_target)
    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        z = np.ravel(_SQRT2 * special.erfcinv(erfc_value)).astype(float)

    flat_target = np.ravel(log_target)
    # erfcinv keeps no relative precision once its argument is subnormal
    unresolved = ~np.isfinite(z) | (np.ravel(erfc_value) < np.finfo(float).tiny)
    for idx in np.flatnonzero(unresolved):
        z[idx] = _bracketed_standard_quantile(float(flat_target[idx]), model)
    z = _refine_upper_quantile(z, flat_target)

    sizes = np.exp(model.mu + model.sigma * z).reshape(u_arr.shape)
    sizes = np.where(u_arr == 0.0, model.s_min, np.maximum(sizes, model.s_min))
    return _result(sizes, scalar)


# ==================== Dispatch ====================

def tail_ccdf(model: TailModel) -> Callable[[ArrayLike], ArrayLike]:
    """CCDF of a tail model as a one-argument callable"""
    if isinstance(model, ParetoTail):
        return lambda s: pareto_ccdf(s, model)
    return lambda s: lognormal_tail_ccdf(s, model)


def tail_quantile(u: ArrayLike, model: TailModel) -> ArrayLike:
    if isinstance(model, ParetoTail):
        return pareto_quantile(u, model)
    return lognormal_tail_quantile(u, model)


def tail_logpdf(s: ArrayLike, model: TailModel) -> ArrayLike:
    if isinstance(model, ParetoTail):
        return pareto_logpdf(s, model)
    return lognormal_tail_logpdf(s, model)


def sample(model: TailModel, n: int, stream: np.random.Generator) -> np.ndarray:
    """
    n independent draws by inverse transform

    Args:
        model: ParetoTail or LogNormalTail
        n: Number of draws (>= 0)
        stream: Generator from engine.streams.substream

    Returns:
        numpy array of n positive sizes
    """
    if n < 0:
        raise DomainError(f"sample: n must be non-negative, got {n}")
    u = stream.random(n)
    if isinstance(model, LogNormalTail) and not model.is_truncated:
        u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
    return np.asarray(tail_quantile(u, model), dtype=float)
