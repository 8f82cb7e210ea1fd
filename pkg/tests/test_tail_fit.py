"""
Tests for power-law and truncated log-normal fitting and the KS cutoff scan
"""

import math

import numpy as np
import pytest

from base.errors import DegenerateTailError, DomainError, InsufficientTailError
from engine.dist_core import lognormal_tail_logpdf, pareto_logpdf, sample, tail_ccdf
from engine.streams import substream
from engine.tail_fit import (
    fit_lognormal_tail,
    fit_pareto_given_smin,
    ks_statistic,
    lognormal_log_likelihood,
    pareto_log_likelihood,
    scan_smin,
    tail_values,
)
from models.distributions import LogNormalTail, ParetoTail
from models.panel import SizeSample


def brute_force_ks(tail, model_cdf):
    """Double loop over tail points and empirical step values"""
    m = len(tail)
    worst = 0.0
    for x, f in zip(tail, model_cdf):
        at_or_below = sum(1 for y in tail if y <= x) / m
        below = sum(1 for y in tail if y < x) / m
        worst = max(worst, abs(at_or_below - f), abs(below - f))
    return worst


# ==================== Power Law MLE ====================

@pytest.mark.smoke
def test_pareto_mle_closed_form():
    """Test: sizes {1, e, e²} at s_min=1 give ζ̂ = 3/(0+1+2) = 1"""
    fit = fit_pareto_given_smin([1.0, math.e, math.e ** 2], 1.0)

    assert fit.zeta_hat == pytest.approx(1.0, abs=1e-12)
    assert fit.n_tail == 3
    assert fit.s_min == 1.0


@pytest.mark.smoke
def test_pareto_mle_ignores_points_below_cutoff():
    fit = fit_pareto_given_smin([0.2, 0.5, 1.0, math.e, math.e ** 2], 1.0)

    assert fit.n_tail == 3
    assert fit.zeta_hat == pytest.approx(1.0, abs=1e-12)


@pytest.mark.smoke
def test_pareto_mle_errors():
    with pytest.raises(InsufficientTailError) as info:
        fit_pareto_given_smin([1.0, 2.0, 5.0], 4.0)
    assert info.value.n_tail == 1

    with pytest.raises(DegenerateTailError):
        fit_pareto_given_smin([3.0, 3.0, 3.0], 3.0)

    with pytest.raises(DomainError):
        fit_pareto_given_smin([1.0, 2.0], 0.0)


@pytest.mark.statistical
def test_pareto_mle_recovers_exponent_at_known_cutoff(table_pareto):
    """Test: 20 seeded trials of 10^4 draws stay within the 3σ band ±0.04"""
    misses = 0
    for trial in range(20):
        drawn = sample(table_pareto, 10_000, substream(100, trial))
        fit = fit_pareto_given_smin(drawn, table_pareto.s_min)
        if abs(fit.zeta_hat - table_pareto.zeta) > 0.04:
            misses += 1

    assert misses <= 1


# ==================== KS Distance ====================

@pytest.mark.numerics
@pytest.mark.parametrize("n", [1, 2, 17, 250, 1000])
def test_ks_statistic_matches_brute_force(n):
    """Test: vectorized KS equals the double-loop oracle within 1e-12"""
    model = ParetoTail(zeta=1.3, s_min=5.0)
    drawn = sample(model, n, substream(7, n))
    tail = np.sort(drawn)
    model_cdf = 1.0 - np.asarray(tail_ccdf(model)(tail))

    fast = ks_statistic(drawn, tail_ccdf(model), model.s_min)

    assert abs(fast - brute_force_ks(tail.tolist(), model_cdf.tolist())) <= 1e-12


@pytest.mark.numerics
def test_ks_statistic_with_ties_matches_brute_force():
    values = [2.0, 2.0, 3.0, 3.0, 3.0, 8.0, 20.0]
    model = ParetoTail(zeta=1.0, s_min=2.0)
    tail = sorted(values)
    model_cdf = [1.0 - (x / 2.0) ** -1.0 for x in tail]

    assert ks_statistic(values, tail_ccdf(model), 2.0) == pytest.approx(
        brute_force_ks(tail, model_cdf), abs=1e-12)


@pytest.mark.smoke
def test_ks_statistic_needs_a_tail_point():
    with pytest.raises(InsufficientTailError):
        ks_statistic([1.0, 2.0], tail_ccdf(ParetoTail(zeta=1.0, s_min=10.0)), 10.0)


@pytest.mark.smoke
def test_fit_reports_ks_against_fitted_model():
    drawn = sample(ParetoTail(zeta=1.1, s_min=1.0), 500, substream(8))
    fit = fit_pareto_given_smin(drawn, 1.0)

    assert fit.ks_distance == pytest.approx(
        ks_statistic(drawn, tail_ccdf(fit.model()), 1.0), abs=1e-15)


# ==================== Cutoff Scan ====================

@pytest.mark.smoke
def test_scan_requires_floor():
    with pytest.raises(InsufficientTailError):
        scan_smin(list(range(1, 10)))


@pytest.mark.numerics
def test_scan_minimizes_over_candidates(pareto_sample):
    """Test: the chosen cutoff has the smallest D of every admissible distinct value"""
    best = scan_smin(pareto_sample)
    values = pareto_sample.values

    for s_min in np.unique(values)[:-10:37]:
        other = fit_pareto_given_smin(pareto_sample, float(s_min))
        assert best.ks_distance <= other.ks_distance

    assert best.n_tail >= 10
    assert best.n_tail == int(np.sum(values >= best.s_min))


@pytest.mark.numerics
def test_scan_singleton_candidate_equals_fixed_cutoff(pareto_sample):
    s_min = float(pareto_sample.values[100])

    scanned = scan_smin(pareto_sample, candidates=[s_min])
    fixed = fit_pareto_given_smin(pareto_sample, s_min)

    assert scanned == fixed


@pytest.mark.smoke
def test_scan_candidates_below_floor_are_rejected():
    values = list(np.geomspace(1.0, 1000.0, 30))
    with pytest.raises(InsufficientTailError):
        scan_smin(values, candidates=[values[-5]])


@pytest.mark.smoke
def test_scan_ties_keep_the_smaller_cutoff(monkeypatch):
    """Test: when every candidate reports the same D the smallest cutoff wins"""
    monkeypatch.setattr("engine.tail_fit._fit_pareto_tail", lambda tail, s_min: (1.0, 0.1))
    values = list(np.geomspace(1.0, 1000.0, 40))

    fit = scan_smin(values)
    listed = scan_smin(values, candidates=[values[20], values[5], values[12]])

    assert fit.s_min == min(values)
    assert fit.n_tail == 40
    assert fit.ks_distance == 0.1
    assert listed.s_min == values[5]


@pytest.mark.smoke
def test_scan_floor_is_validated_not_defaulted():
    """Test: an explicit floor of 0 is rejected while a floor of 1 overrides the configured 10"""
    values = [1.0, 2.0, 4.0, 8.0, 16.0]

    with pytest.raises(DomainError):
        scan_smin(values, min_tail_points=0)
    with pytest.raises(InsufficientTailError):
        scan_smin(values)
    assert scan_smin(values, min_tail_points=1).n_tail >= 2


@pytest.mark.numerics
def test_raising_cutoff_never_increases_tail_size(pareto_sample):
    values = pareto_sample.values
    cutoffs = np.geomspace(float(values[0]), float(values[-10]), 60)

    sizes = [fit_pareto_given_smin(pareto_sample, float(c)).n_tail for c in cutoffs]

    assert all(a >= b for a, b in zip(sizes, sizes[1:]))
    assert sizes[0] == len(pareto_sample)


@pytest.mark.numerics
@pytest.mark.parametrize("scale", [1024.0, 0.37, 1000.0])
def test_scan_is_scale_equivariant(pareto_sample, scale):
    """Test: multiplying every size by λ keeps ζ̂, D and n_tail and multiplies s_min by λ"""
    base = scan_smin(pareto_sample)
    scaled = scan_smin(pareto_sample.values * scale)

    assert scaled.zeta_hat == pytest.approx(base.zeta_hat, abs=1e-12)
    assert scaled.ks_distance == pytest.approx(base.ks_distance, abs=1e-12)
    assert scaled.n_tail == base.n_tail
    assert scaled.s_min == pytest.approx(base.s_min * scale, rel=1e-12)


@pytest.mark.statistical
def test_scan_on_pure_power_law_stays_near_the_true_cutoff():
    """Test: 50 samples of 10^4 power-law points pick s_min at the low end of the sample

    A pure power law admits every cutoff, so the scan drifts upward by chance.
    The median bound holds in at least 45 trials and the 20% quantile bound
    in at least 30.
    """
    model = ParetoTail(zeta=1.0, s_min=100.0)
    below_median = 0
    below_fifth = 0
    for trial in range(50):
        drawn = sample(model, 10_000, substream(32, trial))
        fit = scan_smin(drawn)
        assert fit.s_min >= model.s_min
        below_median += fit.s_min <= float(np.quantile(drawn, 0.5))
        below_fifth += fit.s_min <= float(np.quantile(drawn, 0.2))

    assert below_median >= 45
    assert below_fifth >= 30


@pytest.mark.statistical
def test_scan_recovers_cutoff_of_mixed_sample():
    """Test: log-normal body below a power-law tail puts s_min near the junction"""
    hits = 0
    for trial in range(10):
        stream = substream(31, trial)
        body = np.exp(stream.normal(2.0, 0.6, 4000))
        body = body[body < 20.0]
        tail = sample(ParetoTail(zeta=1.2, s_min=20.0), 2000, stream)
        fit = scan_smin(np.concatenate([body, tail]))
        if 10.0 <= fit.s_min <= 40.0 and abs(fit.zeta_hat - 1.2) < 0.15:
            hits += 1

    assert hits >= 8


# ==================== Truncated Log-Normal MLE ====================

@pytest.mark.numerics
def test_lognormal_simplex_matches_closed_form_without_truncation(lognormal_sample):
    """Test: s_min=0 reproduces μ̂ = mean ln s, σ̂ = std ln s within 1e-6"""
    log_values = np.log(lognormal_sample.values)

    fit = fit_lognormal_tail(lognormal_sample, 0.0)

    assert fit.converged
    assert fit.mu_hat == pytest.approx(float(np.mean(log_values)), abs=1e-6)
    assert fit.sigma_hat == pytest.approx(float(np.std(log_values)), abs=1e-6)
    assert fit.n_tail == len(lognormal_sample)


@pytest.mark.numerics
def test_lognormal_fit_log_likelihood_is_consistent(table_lognormal):
    drawn = sample(table_lognormal, 3000, substream(41))
    fit = fit_lognormal_tail(drawn, table_lognormal.s_min)
    tail = tail_values(drawn, fit.s_min)

    helper = lognormal_log_likelihood(tail, fit.mu_hat, fit.sigma_hat, fit.s_min)
    summed = float(np.sum(lognormal_tail_logpdf(tail, fit.model())))

    assert fit.log_likelihood == pytest.approx(helper, rel=1e-10)
    assert helper == pytest.approx(summed, rel=1e-10)
    assert helper >= lognormal_log_likelihood(tail, table_lognormal.mu, table_lognormal.sigma,
                                              table_lognormal.s_min) - 1e-6


@pytest.mark.numerics
def test_lognormal_fit_reports_the_shared_likelihood(monkeypatch, table_lognormal):
    """Test: the optimizer evaluates lognormal_log_likelihood and reports its value at the optimum"""
    evaluated = []

    def counting(tail, mu, sigma, s_min):
        evaluated.append((mu, sigma))
        return lognormal_log_likelihood(tail, mu, sigma, s_min)

    monkeypatch.setattr("engine.tail_fit.lognormal_log_likelihood", counting)
    drawn = sample(table_lognormal, 2000, substream(46))

    fit = fit_lognormal_tail(drawn, table_lognormal.s_min)
    tail = tail_values(drawn, fit.s_min)

    assert len(evaluated) > 10
    assert fit.log_likelihood == pytest.approx(
        lognormal_log_likelihood(tail, fit.mu_hat, fit.sigma_hat, fit.s_min), rel=1e-15)


@pytest.mark.numerics
@pytest.mark.parametrize("depth", [0.0, 1.0])
def test_lognormal_gradient_vanishes_at_reported_optimum(depth):
    """Test: central-difference gradient of the log-likelihood in (μ, σ) has norm <= 1e-4"""
    model = LogNormalTail(mu=2.0, sigma=1.0, s_min=math.exp(2.0 + depth))
    drawn = sample(model, 500, substream(45, int(depth)))
    fit = fit_lognormal_tail(drawn, model.s_min)
    tail = tail_values(drawn, fit.s_min)
    h = 1e-5

    def loglik(mu, sigma):
        return lognormal_log_likelihood(tail, mu, sigma, fit.s_min)

    d_mu = (loglik(fit.mu_hat + h, fit.sigma_hat) - loglik(fit.mu_hat - h, fit.sigma_hat)) / (2 * h)
    d_sigma = (loglik(fit.mu_hat, fit.sigma_hat + h) - loglik(fit.mu_hat, fit.sigma_hat - h)) / (2 * h)

    assert fit.converged
    assert math.hypot(d_mu, d_sigma) <= 1e-4


@pytest.mark.numerics
def test_lognormal_fit_shifts_mu_under_rescaling():
    """Test: multiplying sizes and s_min by λ shifts μ̂ by ln λ and keeps σ̂"""
    model = LogNormalTail(mu=2.0, sigma=1.0, s_min=math.exp(2.0))
    drawn = sample(model, 2000, substream(44))
    scale = 1000.0

    base = fit_lognormal_tail(drawn, model.s_min)
    scaled = fit_lognormal_tail(drawn * scale, model.s_min * scale)

    assert base.converged and scaled.converged
    assert scaled.n_tail == base.n_tail
    assert scaled.mu_hat == pytest.approx(base.mu_hat + math.log(scale), abs=1e-6)
    assert scaled.sigma_hat == pytest.approx(base.sigma_hat, abs=1e-6)


@pytest.mark.numerics
def test_pareto_log_likelihood_matches_density_sum(table_pareto):
    drawn = np.sort(sample(table_pareto, 1000, substream(42)))

    assert pareto_log_likelihood(drawn, 1.09, 974.0) == pytest.approx(
        float(np.sum(pareto_logpdf(drawn, table_pareto))), rel=1e-12)


@pytest.mark.statistical
def test_lognormal_recovery_under_heavy_truncation(table_lognormal):
    """Test: 10^5 draws recover μ within ±1.0 and σ within ±0.2 (about 4 sampling SDs)"""
    drawn = sample(table_lognormal, 100_000, substream(43))

    fit = fit_lognormal_tail(drawn, table_lognormal.s_min)

    assert fit.converged
    assert abs(fit.mu_hat - table_lognormal.mu) < 1.0
    assert abs(fit.sigma_hat - table_lognormal.sigma) < 0.2


@pytest.mark.smoke
def test_lognormal_iteration_cap_reports_no_convergence(lognormal_sample):
    fit = fit_lognormal_tail(lognormal_sample, 0.0, max_iterations=3)

    assert fit.converged is False
    assert fit.iterations <= 3


@pytest.mark.smoke
def test_lognormal_fit_errors():
    with pytest.raises(InsufficientTailError):
        fit_lognormal_tail([1.0, 2.0, 3.0], 2.5)
    with pytest.raises(DegenerateTailError):
        fit_lognormal_tail([4.0, 4.0, 4.0, 4.0], 1.0)
    with pytest.raises(DomainError):
        fit_lognormal_tail([1.0, 2.0, 3.0], -1.0)


@pytest.mark.smoke
@pytest.mark.parametrize("overrides", [{'max_iterations': 0}, {'xatol': 0.0}, {'xatol': -1e-8}])
def test_lognormal_zero_overrides_are_rejected_not_defaulted(lognormal_sample, overrides):
    with pytest.raises(DomainError):
        fit_lognormal_tail(lognormal_sample, 0.0, **overrides)


@pytest.mark.smoke
def test_fits_accept_size_samples_and_arrays():
    values = [3.0, 1.0, 2.0, 8.0, 5.0]
    sample_model = SizeSample.from_values(values)

    assert fit_pareto_given_smin(sample_model, 1.0) == fit_pareto_given_smin(np.array(values), 1.0)
