"""
Goodness of Fit
Monte Carlo p-value of the power-law hypothesis and the power-law vs
log-normal log-likelihood ratio

Replicate i always draws from substream(master_seed, i), so results do not
depend on the worker count or on scheduling order.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence

import numpy as np

from base.config import AnalysisConfig
from base.errors import (
    CutoffMismatchError,
    DomainError,
    InsufficientTailError,
    NumericalError,
    ReplicateFailureError,
)
from base.logger import Logger
from engine.dist_core import lognormal_tail_logpdf, pareto_logpdf, pareto_quantile
from engine.streams import substream
from engine.tail_fit import SampleLike, scan_smin, sorted_values, tail_values
from models.distributions import ParetoTail
from models.fits import (
    GofResult,
    LikelihoodRatioResult,
    LogNormalTailFit,
    ParetoTailFit,
    ReplicateSummary,
)
from models.panel import SizeSample
from models.types import ReplicateMode


def _check_fit_matches(values: np.ndarray, fit: ParetoTailFit) -> None:
    n_tail = values.size - int(np.searchsorted(values, fit.s_min, side='left'))
    if n_tail != fit.n_tail:
        raise DomainError(
            f"fit reports n_tail={fit.n_tail} but the sample has {n_tail} point(s) >= s_min={fit.s_min}"
        )


def _replicate_values(
    values: np.ndarray,
    model: ParetoTail,
    n_tail: int,
    stream: np.random.Generator,
    mode: ReplicateMode
) -> np.ndarray:
    """Sorted synthetic sizes for one replicate"""
    if mode is ReplicateMode.TAIL_ONLY:
        return np.sort(pareto_quantile(stream.random(n_tail), model))

    n = values.size
    body = values[:n - n_tail]
    n_from_tail = int(stream.binomial(n, n_tail / n))
    draws = pareto_quantile(stream.random(n_from_tail), model)
    n_from_body = n - n_from_tail
    if n_from_body and body.size:
        picks = body[stream.integers(0, body.size, n_from_body)]
    else:
        picks = np.empty(0)
    return np.sort(np.concatenate([picks, draws]))


def synth_dataset(
    sample: SampleLike,
    fit: ParetoTailFit,
    stream: np.random.Generator,
    mode: ReplicateMode = ReplicateMode.SEMIPARAMETRIC
) -> SizeSample:
    """
    One synthetic data set under the fitted power law

    Semiparametric: each of the n points is, with probability n_tail/n, a
    fresh power-law draw above s_min, otherwise a resample of the empirical
    values below s_min. Tail-only: n_tail power-law draws.

    Args:
        sample: Empirical sizes the fit was derived from
        fit: Power-law fit of the sample
        stream: Replicate substream
        mode: Replicate construction

    Returns:
        SizeSample replicate
    """
    values = sorted_values(sample)
    _check_fit_matches(values, fit)
    replicate = _replicate_values(values, fit.model(), fit.n_tail, stream, mode)
    as_of = sample.as_of if isinstance(sample, SizeSample) else None
    return SizeSample(as_of=as_of, sizes=replicate.tolist())


def _replicate_block(args) -> List[Optional[float]]:
    """Refit a block of replicates; None marks a replicate that failed to fit"""
    values, zeta, s_min, n_tail, master_seed, indices, mode_value, floor = args
    model = ParetoTail(zeta=zeta, s_min=s_min)
    mode = ReplicateMode(mode_value)
    distances = []
    for index in indices:
        replicate = _replicate_values(values, model, n_tail, substream(master_seed, index), mode)
        try:
            distances.append(scan_smin(replicate, min_tail_points=floor).ks_distance)
        except NumericalError as e:
            Logger.debug(f"replicate {index} excluded: {e.describe()}")
            distances.append(None)
    return distances


def _blocks(n_replicates: int, workers: int) -> List[Sequence[int]]:
    size = max(1, math.ceil(n_replicates / (workers * 4)))
    return [range(start, min(start + size, n_replicates)) for start in range(0, n_replicates, size)]


def bootstrap_pvalue(
    sample: SampleLike,
    fit: ParetoTailFit,
    n_replicates: Optional[int] = None,
    master_seed: Optional[int] = None,
    mode: ReplicateMode = ReplicateMode.SEMIPARAMETRIC,
    workers: int = 1,
    min_tail_points: Optional[int] = None
) -> GofResult:
    """
    Fraction of synthetic data sets whose KS distance to their own best fit is
    at least the empirical one

    Every replicate reruns the full cutoff scan. Replicates that cannot be
    fitted are excluded and counted.

    Args:
        sample: Empirical sizes
        fit: scan_smin fit of the sample
        n_replicates: Replicate count (default from config)
        master_seed: Seed of the replicate substreams (default from config)
        mode: Replicate construction
        workers: Process count; 1 runs in-process
        min_tail_points: Scan floor for replicates (default from config)

    Returns:
        GofResult

    Raises:
        ReplicateFailureError: No replicate could be fitted
    """
    pipeline = AnalysisConfig.section('pipeline')
    n_replicates = int(pipeline['n_replicates'] if n_replicates is None else n_replicates)
    master_seed = int(pipeline['master_seed'] if master_seed is None else master_seed)
    floor = int(AnalysisConfig.get('tail_fit', 'min_tail_points') if min_tail_points is None else min_tail_points)
    if n_replicates < 1:
        raise DomainError(f"n_replicates must be at least 1, got {n_replicates}")
    if floor < 1:
        raise DomainError(f"min_tail_points must be at least 1, got {floor}")

    values = sorted_values(sample)
    _check_fit_matches(values, fit)
    Logger.info(f"bootstrap: {n_replicates} {mode.value} replicate(s), seed={master_seed}, "
                f"workers={workers}, D_empirical={fit.ks_distance:.5f}")

    def block_args(indices):
        return (values, fit.zeta_hat, fit.s_min, fit.n_tail, master_seed, indices, mode.value, floor)

    if workers <= 1:
        distances = _replicate_block(block_args(range(n_replicates)))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = pool.map(_replicate_block, [block_args(b) for b in _blocks(n_replicates, workers)])
            distances = [d for chunk in chunks for d in chunk]

    fitted = np.asarray([d for d in distances if d is not None], dtype=float)
    n_excluded = n_replicates - fitted.size
    if fitted.size == 0:
        raise ReplicateFailureError(f"all {n_replicates} replicate(s) failed to fit")
    if n_excluded:
        Logger.warning(f"bootstrap: {n_excluded} replicate(s) excluded after fit failures")

    n_exceeding = int(np.count_nonzero(fitted >= fit.ks_distance))
    result = GofResult(
        p_value=n_exceeding / fitted.size,
        n_replicates=int(fitted.size),
        n_requested=n_replicates,
        n_excluded=int(n_excluded),
        n_exceeding=n_exceeding,
        d_empirical=fit.ks_distance,
        master_seed=master_seed,
        replicate_mode=mode,
        replicate_d_summary=ReplicateSummary(
            min=float(fitted.min()), median=float(np.median(fitted)), max=float(fitted.max())
        ),
        replicate_distances=tuple(fitted.tolist())
    )
    Logger.info(f"bootstrap: p={result.p_value:.4f} ({n_exceeding}/{fitted.size})")
    return result


def log_likelihood_ratio(
    sample: SampleLike,
    pl: ParetoTailFit,
    ln_fit: LogNormalTailFit
) -> LikelihoodRatioResult:
    """
    R = Σ ln p_PL(s_j) - Σ ln p_LN(s_j) over s_j >= s_min

    Args:
        sample: Sizes
        pl: Power-law fit
        ln_fit: Truncated log-normal fit at the same cutoff

    Returns:
        LikelihoodRatioResult in natural-log and base-10 units

    Raises:
        CutoffMismatchError: The fits use different cutoffs
        InsufficientTailError: No point at or above the cutoff
        DomainError: A tail density is zero in floating point
    """
    if pl.s_min != ln_fit.s_min:
        raise CutoffMismatchError(f"power law s_min={pl.s_min} but log-normal s_min={ln_fit.s_min}")
    tail = tail_values(sample, pl.s_min)
    if tail.size == 0:
        raise InsufficientTailError(f"no point >= s_min={pl.s_min}", n_tail=0)

    pl_terms = np.atleast_1d(pareto_logpdf(tail, pl.model()))
    ln_terms = np.atleast_1d(lognormal_tail_logpdf(tail, ln_fit.model()))
    if not (np.all(np.isfinite(pl_terms)) and np.all(np.isfinite(ln_terms))):
        raise DomainError("a tail log-density is not finite")

    pl_loglik = math.fsum(pl_terms.tolist())
    ln_loglik = math.fsum(ln_terms.tolist())
    r_natural = pl_loglik - ln_loglik
    Logger.debug(f"likelihood ratio: n_tail={tail.size}, R={r_natural:.4f}")
    return LikelihoodRatioResult(
        r_natural=r_natural,
        r_base10=r_natural / math.log(10),
        n_tail=int(tail.size),
        pl_loglik=pl_loglik,
        ln_loglik=ln_loglik,
        s_min=pl.s_min
    )
