"""SNR laws: path loss, truncation, quadrature expectations, discretization."""
import math

import numpy as np
import pytest

from edgesplit import (
    NumericalError,
    PathLossParams,
    StageDistribution,
    distribution_from_config,
    mean_snr_from_pathloss,
)
from edgesplit.channel import per_stage

from conftest import MEAN_SNR_D50, make_params, pathloss_at

W = 2e6


def inv_rate(s):
    return 1.0 / (W * np.log2(1.0 + s))


# -- path loss ---------------------------------------------------------------

def test_mean_snr_golden(params):
    assert mean_snr_from_pathloss(pathloss_at(50), params) == pytest.approx(MEAN_SNR_D50, rel=1e-14)


def test_mean_snr_power_law(params):
    near = mean_snr_from_pathloss(pathloss_at(25), params)
    far = mean_snr_from_pathloss(pathloss_at(50), params)
    assert near == pytest.approx(8 * far, rel=1e-12)


def test_mean_snr_zero_exponent_ignores_distance(params):
    base = dict(antenna_gain=4.11, carrier_hz=915e6, exponent=1e-300)
    a = mean_snr_from_pathloss(PathLossParams(distance_m=10, **base), params)
    b = mean_snr_from_pathloss(PathLossParams(distance_m=1000, **base), params)
    assert a == pytest.approx(b, rel=1e-9)
    assert a == pytest.approx(params.tx_power_w * 4.11 / params.noise_w, rel=1e-9)


# -- law shape ----------------------------------------------------------------

@pytest.fixture(scope="module")
def trunc():
    return StageDistribution.truncated_exponential(MEAN_SNR_D50, floor_ratio=1e-3)


def test_cdf_endpoints(trunc):
    assert trunc.cdf(trunc.support_lo) == 0.0
    assert trunc.cdf(trunc.support_lo / 2) == 0.0
    assert trunc.cdf(math.inf) == 1.0
    assert trunc.cdf(trunc.support_lo + 50 * trunc.mean_snr) == pytest.approx(1.0, abs=1e-15)


def test_pdf_normalizes(trunc):
    assert trunc.expect(lambda s: 1.0) == pytest.approx(1.0, abs=1e-9)


def test_pdf_nonnegative_and_cdf_monotone(trunc):
    xs = np.linspace(trunc.support_lo / 2, trunc.support_lo + 10 * trunc.mean_snr, 400)
    assert np.all(trunc.pdf(xs) >= 0)
    cdfs = trunc.cdf(xs)
    assert np.all(np.diff(cdfs) >= -1e-15)


def test_expectation_of_identity_is_mean():
    plain = StageDistribution.exponential(MEAN_SNR_D50)
    assert plain.expect(lambda s: s) == pytest.approx(MEAN_SNR_D50, rel=1e-8)


def test_indicator_expectation_matches_survival(trunc):
    for t in (trunc.support_lo * 2, 0.3, 1.0):
        got = trunc.expect(lambda s, t=t: 1.0 * (s > t))
        assert got == pytest.approx(1.0 - trunc.cdf(t), abs=1e-9)


def test_doubly_truncated_support():
    d = StageDistribution.truncated_exponential(1.0, floor=0.1, upper=2.0)
    assert d.cdf(0.1) == 0.0
    assert d.cdf(2.0) == 1.0
    assert d.expect(lambda s: 1.0) == pytest.approx(1.0, abs=1e-10)
    assert d.quantile(1.0) == pytest.approx(2.0, rel=1e-12)


# -- expectation operators -----------------------------------------------------

def test_inv_rate_expectation_vs_monte_carlo(trunc):
    analytic = trunc.expect(inv_rate)
    rng = np.random.default_rng(2024)
    samples = trunc.sample(rng, size=10_000_000)
    vals = inv_rate(samples)
    mc = vals.mean()
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(analytic - mc) <= 3 * se


def test_partial_expect_additivity(trunc):
    split = 0.4
    left = trunc.partial_expect(inv_rate, trunc.support_lo, split)
    right = trunc.partial_expect(inv_rate, split, math.inf)
    assert left + right == pytest.approx(trunc.expect(inv_rate), abs=1e-9)


def test_partial_expect_degenerate_and_ordering(trunc):
    assert trunc.partial_expect(inv_rate, 0.5, 0.5) == 0.0
    with pytest.raises(ValueError):
        trunc.partial_expect(inv_rate, 0.7, 0.2)


def test_partial_expect_matches_conditional_monte_carlo(trunc):
    t = 0.25
    analytic = trunc.partial_expect(inv_rate, t, math.inf)
    rng = np.random.default_rng(7)
    samples = trunc.sample(rng, size=2_000_000)
    kept = samples[samples > t]
    # E[g | s > t] * P{s > t}, estimated by rejection
    vals = inv_rate(kept)
    est = vals.sum() / len(samples)
    se = math.sqrt(np.var(np.where(samples > t, inv_rate(np.maximum(samples, t)), 0.0), ddof=1)
                   / len(samples))
    assert abs(analytic - est) <= 3 * se


def test_untruncated_inv_rate_diverges():
    plain = StageDistribution.exponential(MEAN_SNR_D50)
    with pytest.raises(NumericalError) as err:
        plain.expect(inv_rate)
    assert err.value.estimate is not None


def test_truncation_floor_lowers_inv_rate_expectation():
    a = StageDistribution.truncated_exponential(1.0, floor_ratio=1e-4).expect(inv_rate)
    b = StageDistribution.truncated_exponential(1.0, floor_ratio=1e-2).expect(inv_rate)
    assert b < a


# -- sampling -------------------------------------------------------------------

def test_quantile_median_of_exponential():
    d = StageDistribution.exponential(1.0)
    assert d.quantile(0.5) == pytest.approx(math.log(2), rel=1e-12)


def test_sampling_ks_statistic(trunc):
    rng = np.random.default_rng(99)
    samples = np.sort(trunc.sample(rng, size=1_000_000))
    n = len(samples)
    grid = (np.arange(n) + np.arange(1, n + 1)) / (2 * n)
    ks = np.max(np.abs(trunc.cdf(samples) - grid)) + 0.5 / n
    assert ks < 0.002


def test_sampling_deterministic(trunc):
    a = trunc.sample(np.random.default_rng(5), size=16)
    b = trunc.sample(np.random.default_rng(5), size=16)
    assert np.array_equal(a, b)


def test_consecutive_stage_samples_uncorrelated(trunc):
    rng = np.random.default_rng(11)
    draws = np.column_stack([trunc.sample(rng, size=100_000) for _ in range(2)])
    r = np.corrcoef(draws[:, 0], draws[:, 1])[0, 1]
    assert abs(r) < 0.01


def test_single_atom_always_same():
    d = StageDistribution.discrete([(5.0, 1.0)])
    rng = np.random.default_rng(0)
    assert np.all(d.sample(rng, size=8) == 5.0)


# -- discrete laws ---------------------------------------------------------------

def test_discrete_validation():
    with pytest.raises(ValueError):
        StageDistribution(kind="discrete", atoms=((1.0, 0.5), (2.0, 0.4)))
    with pytest.raises(ValueError):
        StageDistribution(kind="discrete", atoms=((2.0, 0.5), (1.0, 0.5)))
    with pytest.raises(ValueError):
        StageDistribution(kind="discrete", atoms=((-1.0, 1.0),))


def test_discrete_canonicalization_merges_and_sorts():
    a = StageDistribution.discrete([(2.0, 0.25), (1.0, 0.5), (2.0, 0.25)])
    b = StageDistribution.discrete([(1.0, 0.5), (2.0, 0.5)])
    assert a == b


def test_discrete_expectation_is_exact_sum():
    d = StageDistribution.discrete([(1.0, 0.25), (2.0, 0.25), (4.0, 0.5)])
    assert d.expect(lambda s: s) == 1.0 * 0.25 + 2.0 * 0.25 + 4.0 * 0.5
    assert d.partial_expect(lambda s: s, 2.0, 4.0) == 2.0 * 0.25 + 4.0 * 0.5
    assert d.cdf(2.0) == 0.5
    assert d.cdf(1.9999) == 0.25


# -- discretization ----------------------------------------------------------------

def test_discretize_two_points(trunc):
    d = trunc.discretize(2)
    atoms = d.atoms
    assert len(atoms) == 2
    assert atoms[0][1] == pytest.approx(0.5)
    assert atoms[0][0] == pytest.approx(trunc.quantile(0.25), rel=1e-12)
    assert atoms[1][0] == pytest.approx(trunc.quantile(0.75), rel=1e-12)
    with pytest.raises(ValueError):
        trunc.discretize(1)


def test_discretize_mean_converges(trunc):
    true_mean = trunc.expect(lambda s: s)
    errors = []
    for n in (64, 128, 256, 512):
        approx = trunc.discretize(n).expect(lambda s: s)
        errors.append(abs(approx - true_mean))
    assert all(a > b for a, b in zip(errors, errors[1:]))
    # roughly halves per doubling
    assert errors[-1] < errors[0] / 4


def test_discretized_expectation_is_finite_sum(trunc):
    d = trunc.discretize(32)
    by_hand = sum(p * inv_rate(s) for s, p in d.atoms)
    assert d.expect(inv_rate) == by_hand


# -- config parsing -----------------------------------------------------------------

def test_distribution_from_config_kinds(params):
    t = distribution_from_config({"kind": "truncated_exponential", "mean_snr": 2.0,
                                  "snr_floor_ratio": 0.01}, params)
    assert t.support_lo == pytest.approx(0.02)
    p = distribution_from_config({"kind": "pathloss_rayleigh", "distance_m": 50,
                                  "antenna_gain": 4.11, "carrier_hz": 915e6,
                                  "exponent": 3, "snr_floor_ratio": 1e-3}, params)
    assert p.mean_snr == pytest.approx(MEAN_SNR_D50, rel=1e-12)
    d = distribution_from_config({"kind": "discrete", "atoms": [[1.0, 1.0]]}, params)
    assert d.kind == "discrete"
    with pytest.raises(ValueError):
        distribution_from_config({"kind": "weibull"}, params)


def test_per_stage_helpers(trunc):
    assert per_stage(trunc, 3) == (trunc, trunc, trunc)
    assert per_stage([trunc] * 5, 3) == (trunc, trunc, trunc)
    with pytest.raises(ValueError):
        per_stage([trunc], 2)
