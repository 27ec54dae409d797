"""
Tests for the asymptotic outage rates of the upper bound, AF and DF.
"""

import math

import numpy as np
import pytest

from src.analytic import (
    DecodeMode,
    Regime,
    Strategy,
    SystemParams,
    af_high_snr_gap,
    af_high_snr_snr,
    af_low_snr_ratio,
    af_outage_rate,
    af_rate_loss,
    af_received_snr,
    df_asymptotic_ratio,
    df_decode_prob,
    df_decode_prob_mean,
    df_forwarding_moment,
    df_outage_prob,
    df_received_snr,
    df_outage_rate_approx,
    df_outage_rate_exact,
    df_rate_loss,
    df_survivor_pdf,
    gaussian_outage,
    mac_upper_bound,
    rate_to_snr,
    small_outage_capacity,
    upper_outage_ratio,
)
from src.errors import ConfigError, DomainError
from src.quadrature import integrate
from src.topology import TopologyMoments
from tests.conftest import E_PRODUCT, E_RATIO, E_RHO_D


# ============================================================================
# Helper functions
# ============================================================================

def point(gamma0=1000.0, p=0.1, alpha=0.5, epsilon=0.1):
    return SystemParams(gamma0=gamma0, p=p, alpha=alpha, epsilon=epsilon)


# ============================================================================
# Parameters
# ============================================================================

@pytest.mark.parametrize(
    "field, value",
    [("gamma0", 0.0), ("gamma0", math.inf), ("p", 1.5), ("p", -0.1), ("alpha", 1.0), ("epsilon", 0.0), ("epsilon", 1.0)],
)
def test_params_out_of_range(field, value):
    kwargs = dict(gamma0=1000.0, p=0.1, alpha=0.5, epsilon=0.1)
    kwargs[field] = value
    with pytest.raises(ConfigError) as info:
        SystemParams(**kwargs)
    assert info.value.key == f"system.{field}"


# ============================================================================
# Upper bound
# ============================================================================

def test_mac_upper_example(moments):
    result = mac_upper_bound(point(alpha=0.0), moments)
    assert result.strategy is Strategy.MAC_UPPER
    assert result.received_snr == pytest.approx(900.0 / 11.0, rel=1e-8)
    assert result.rate == pytest.approx(1.63305, abs=1e-4)


def test_mac_upper_scale_consistency(moments):
    base = point(p=0.3)
    scaled = point(p=0.0, gamma0=(1.0 - 0.3) * 1000.0)
    assert mac_upper_bound(base, moments).rate == mac_upper_bound(scaled, moments).rate


def test_upper_outage_ratio_limit(moments):
    params = point(p=0.2, alpha=0.3)
    limit = 1.0 / ((1.0 - 0.2) * (1.0 - 0.3) * E_RHO_D)
    assert upper_outage_ratio(1e-6, params, moments) == pytest.approx(limit, rel=5e-3)
    with pytest.raises(DomainError):
        upper_outage_ratio(0.0, params, moments)


def test_df_asymptotic_ratio(moments):
    assert df_asymptotic_ratio(point(), moments) == pytest.approx(0.9 * 0.5 / 11.0, rel=1e-8)


# ============================================================================
# Amplify-and-forward
# ============================================================================

def test_af_low_snr_matches_linearization(geometry):
    params = point(gamma0=0.01, p=0.0, alpha=0.5)
    expected = 0.25 * 0.01 ** 2 * E_PRODUCT
    assert expected == pytest.approx(4.54e-8, rel=1e-2)
    assert af_received_snr(params, geometry) == pytest.approx(expected, rel=2e-2)


def test_af_high_snr_matches_closed_form(geometry, moments):
    params = point(gamma0=1e6, p=0.1, alpha=0.7325)
    assert af_received_snr(params, geometry) == pytest.approx(af_high_snr_snr(params, moments), rel=1e-2)


def test_af_high_snr_gap_example(moments):
    assert af_high_snr_gap(point(alpha=0.7325), moments) == pytest.approx(1.903, abs=1e-3)
    with pytest.raises(DomainError):
        af_high_snr_gap(point(alpha=0.0), moments)


def test_af_high_snr_snr_concave_in_alpha(moments):
    alphas = np.linspace(0.01, 0.99, 99)
    values = np.array([af_high_snr_snr(point(gamma0=1e6, alpha=a), moments) for a in alphas])
    second = values[:-2] - 2.0 * values[1:-1] + values[2:]
    assert np.all(second <= 1e-9 * values.max())


def test_af_degenerate_cases(geometry):
    assert af_received_snr(point(alpha=0.0), geometry) == 0.0
    assert af_received_snr(point(p=1.0), geometry) == 0.0
    assert af_outage_rate(point(p=1.0), geometry).rate == 0.0


def test_af_low_snr_ratio_forms_agree(geometry, moments):
    params = point(gamma0=1e-3, p=0.2)
    assert af_low_snr_ratio(params, moments, geometry) == pytest.approx(af_low_snr_ratio(params, moments), rel=1e-2)
    assert af_low_snr_ratio(point(p=1.0), moments) == 0.0


def test_af_rate_loss_low_snr_fraction_is_p(moments):
    loss = af_rate_loss(point(gamma0=0.01, p=0.3), moments, Regime.LOW)
    assert loss.fraction == pytest.approx(0.3)
    assert loss.absolute > 0


def test_af_rate_loss_high_snr_limit(moments):
    tiny = TopologyMoments(e_rho_d=E_RHO_D, e_rho_s=E_RHO_D, e_ratio=1e-12, e_product=E_PRODUCT)
    loss = af_rate_loss(point(gamma0=1e6, p=0.1), tiny, Regime.HIGH)
    assert loss.absolute == pytest.approx(0.5 * math.log2(1.0 / 0.9), rel=1e-6)
    assert 0.0 < af_rate_loss(point(gamma0=1e6, p=0.1), moments, Regime.HIGH).absolute < 0.5 * math.log2(1.0 / 0.9)


@pytest.mark.parametrize("regime", [Regime.LOW, Regime.HIGH])
def test_rate_loss_without_attacks_is_zero(moments, regime):
    # the attack-free high-SNR reference would be negative at 0.01
    for gamma0 in (0.01, 1e6):
        assert af_rate_loss(point(gamma0=gamma0, p=0.0), moments, regime) == (0.0, 0.0)
        assert df_rate_loss(point(gamma0=gamma0, p=0.0), moments, regime) == (0.0, 0.0)


def test_af_high_snr_gap_same_at_35_and_45_db(moments):
    low = af_high_snr_gap(point(gamma0=10 ** 3.5, alpha=0.7325), moments)
    high = af_high_snr_gap(point(gamma0=10 ** 4.5, alpha=0.7325), moments)
    assert abs(high - low) < 0.05
    assert low == pytest.approx(1.903, abs=1e-3)


# ============================================================================
# Decode-and-forward
# ============================================================================

def test_decode_prob_forms(geometry):
    params = point()
    # x = 3 at R = 1; relay at s = 1 sees rho_S = 1
    assert df_decode_prob(1.0, 1.0, params, geometry) == pytest.approx(math.exp(-3.0 / 500.0))
    assert df_decode_prob(1.0, 1.0, params, geometry, DecodeMode.APPROX) == pytest.approx(1.0 - 3.0 / 500.0)
    assert df_decode_prob(11.0, 20.0, params, geometry, DecodeMode.APPROX) == 0.0
    assert df_decode_prob(5.0, 1.0, point(alpha=0.0), geometry) == 0.0
    with pytest.raises(DomainError):
        df_decode_prob(5.0, -1.0, params, geometry)


@pytest.mark.parametrize("rate", [0.25, 1.0, 2.0])
def test_decode_prob_forms_differ_by_at_most_half_square(geometry, rate):
    params = point()
    s = np.linspace(1.0, 11.0, 41)
    x = rate_to_snr(rate) / (params.alpha * params.gamma0 * s ** -2.0)
    exact = df_decode_prob(s, rate, params, geometry)
    approx = df_decode_prob(s, rate, params, geometry, DecodeMode.APPROX)
    assert np.all(exact - approx >= -1e-15)
    assert np.all(exact - approx <= 0.5 * x ** 2 + 1e-15)


def test_decode_prob_zero_rate_and_unit_exponent(geometry):
    params = point()
    for mode in DecodeMode:
        assert df_decode_prob(7.0, 0.0, params, geometry, mode) == 1.0
    # x = 500 * rho_S at s = 1 when R solves 2^(2R) - 1 = 500
    assert df_decode_prob(1.0, 0.5 * math.log2(501.0), params, geometry) == pytest.approx(math.exp(-1.0))


def test_survivor_pdf_at_zero_rate_is_uniform(geometry):
    s = np.linspace(1.0, 11.0, 11)
    np.testing.assert_allclose(df_survivor_pdf(s, 0.0, point(), geometry), 0.1, rtol=1e-9)


def test_survivor_pdf_favors_relays_near_source(geometry):
    params = point(gamma0=1000.0, alpha=0.5)
    assert df_survivor_pdf(1.5, 1.0, params, geometry) > 0.1
    assert df_survivor_pdf(10.5, 1.0, params, geometry) < 0.1


def test_survivor_pdf_integrates_to_one(geometry):
    params = point(p=0.2)
    mass = integrate(lambda s: df_survivor_pdf(s, 1.0, params, geometry), 1.0, 11.0)
    assert mass == pytest.approx(1.0, rel=1e-7)


def test_forwarding_moment_not_above_max(geometry):
    params = point()
    assert 0.0 < df_forwarding_moment(1.0, params, geometry) <= 1.0
    assert 0.0 < df_decode_prob_mean(1.0, params, geometry) <= 1.0


def test_df_received_snr_factorization(geometry):
    params = point(p=0.2)
    assert df_received_snr(0.0, params, geometry) == pytest.approx(0.8 * 0.5 * 1000.0 * E_RHO_D, rel=1e-8)
    mean = df_decode_prob_mean(1.0, params, geometry)
    expected = 0.8 * 0.5 * 1000.0 * mean * df_forwarding_moment(1.0, params, geometry)
    assert df_received_snr(1.0, params, geometry) == pytest.approx(expected, rel=1e-9)
    assert df_received_snr(1.0, point(alpha=0.0), geometry) == 0.0


def test_df_outage_prob_edges(geometry):
    assert df_outage_prob(0.0, point(), geometry) == 0.0
    assert df_outage_prob(1.0, point(p=1.0), geometry) == 1.0


@pytest.mark.parametrize("p", [0.0, 0.2, 0.5])
def test_df_outage_prob_increasing_in_rate(geometry, p):
    rates = np.linspace(0.1, 2.5, 25)
    probs = np.array([df_outage_prob(r, point(p=p), geometry) for r in rates])
    assert np.all(np.diff(probs) > 0)


def test_df_exact_round_trip(geometry):
    params = point()
    result = df_outage_rate_exact(params, geometry)
    assert result.strategy is Strategy.DF_EXACT
    assert df_outage_prob(result.rate, params, geometry) == pytest.approx(0.1, abs=1e-9)


def test_df_approx_example(moments):
    params = point(alpha=0.46414)
    assert df_outage_rate_approx(params, moments).rate == pytest.approx(0.8719, abs=1e-3)
    with pytest.raises(DomainError):
        df_outage_rate_approx(point(alpha=0.0), moments)


def test_df_small_outage_limit(moments):
    params = point(alpha=0.3, epsilon=1e-4)
    rate = df_outage_rate_approx(params, moments).rate
    ratio = rate_to_snr(rate) / (params.epsilon * params.gamma0)
    assert ratio == pytest.approx(df_asymptotic_ratio(params, moments), rel=1e-2)
    assert small_outage_capacity(params, moments) == pytest.approx(rate, rel=1e-2)


@pytest.mark.parametrize("alpha", [0.3, 0.5])
@pytest.mark.parametrize("p", [0.0, 0.1, 0.3])
def test_df_small_outage_ratio_over_attack_grid(moments, p, alpha):
    params = point(p=p, alpha=alpha, epsilon=1e-4)
    ratio = rate_to_snr(df_outage_rate_approx(params, moments).rate) / (params.epsilon * params.gamma0)
    assert ratio == pytest.approx((1.0 - p) * (1.0 - alpha) * E_RHO_D, rel=1e-2)


@pytest.mark.parametrize("gamma0_db", [30.0, 40.0])
@pytest.mark.parametrize("epsilon", [0.01, 0.001])
def test_df_exact_close_to_approx_at_small_outage(geometry, moments, gamma0_db, epsilon):
    params = point(gamma0=10 ** (gamma0_db / 10), epsilon=epsilon)
    exact = df_outage_rate_exact(params, geometry).rate
    approx = df_outage_rate_approx(params, moments).rate
    assert abs(exact - approx) / exact < 0.02


def test_df_exact_approx_gap_shrinks_with_epsilon(geometry, moments):
    gaps = []
    for epsilon in (0.1, 0.05, 0.01, 0.001):
        params = point(epsilon=epsilon)
        exact = df_outage_rate_exact(params, geometry).rate
        gaps.append(abs(exact - df_outage_rate_approx(params, moments).rate) / exact)
    assert gaps == sorted(gaps, reverse=True)


def test_df_rate_loss_regimes(moments):
    low = df_rate_loss(point(gamma0=0.01, p=0.3), moments, Regime.LOW)
    assert 0.0 < low.fraction < 0.3
    tiny_eps = df_rate_loss(point(gamma0=0.01, p=0.3, epsilon=1e-6), moments, Regime.LOW)
    assert tiny_eps.fraction == pytest.approx(0.3, rel=1e-3)

    high = df_rate_loss(point(gamma0=1e9, p=0.1, epsilon=1e-5), moments, Regime.HIGH)
    assert high.absolute == pytest.approx(0.5 * math.log2(1.0 / 0.9), rel=2e-2)
    with pytest.raises(DomainError):
        df_rate_loss(point(p=1.0), moments, Regime.HIGH)


@pytest.mark.parametrize("p", [0.05 * k for k in range(1, 11)])
def test_rate_loss_bounds_over_attack_probability(moments, p):
    ceiling = 0.5 * math.log2(1.0 / (1.0 - p))

    assert af_rate_loss(point(gamma0=0.01, p=p), moments, Regime.LOW).fraction == pytest.approx(p, rel=1e-12)
    assert df_rate_loss(point(gamma0=0.01, p=p), moments, Regime.LOW).fraction < p

    af_high = af_rate_loss(point(gamma0=1e9, p=p), moments, Regime.HIGH)
    df_high = df_rate_loss(point(gamma0=1e9, p=p, epsilon=1e-5), moments, Regime.HIGH)
    assert 0.0 < af_high.absolute <= ceiling
    assert 0.0 < df_high.absolute <= ceiling
    assert df_high.absolute == pytest.approx(ceiling, rel=2e-2)


# ============================================================================
# Ordering and monotonicity
# ============================================================================

@pytest.mark.parametrize("gamma0", [0.1, 10.0, 1000.0, 1e5])
def test_strategies_below_upper_bound(geometry, moments, gamma0):
    params = point(gamma0=gamma0, p=0.2, alpha=0.4)
    upper = mac_upper_bound(params, moments).rate
    assert af_outage_rate(params, geometry).rate <= upper
    assert df_outage_rate_approx(params, moments).rate <= upper
    assert df_outage_rate_exact(params, geometry).rate <= upper


def test_rates_monotone(geometry, moments):
    gammas = [1.0, 10.0, 100.0, 1000.0]
    af = [af_outage_rate(point(gamma0=x), geometry).rate for x in gammas]
    df = [df_outage_rate_approx(point(gamma0=x), moments).rate for x in gammas]
    assert af == sorted(af) and df == sorted(df)

    ps = [0.0, 0.2, 0.5, 0.8]
    af = [af_outage_rate(point(p=x), geometry).rate for x in ps]
    df = [df_outage_rate_exact(point(p=x), geometry).rate for x in ps]
    assert af == sorted(af, reverse=True) and df == sorted(df, reverse=True)

    epsilons = [0.001, 0.01, 0.1]
    upper = [mac_upper_bound(point(epsilon=x), moments).rate for x in epsilons]
    assert upper == sorted(upper)


@pytest.mark.parametrize("p", [0.0, 0.3])
def test_af_rate_increasing_in_epsilon(geometry, p):
    epsilons = [0.001, 0.01, 0.05, 0.1, 0.3, 0.5]
    rates = [af_outage_rate(point(p=p, epsilon=x), geometry).rate for x in epsilons]
    assert all(a < b for a, b in zip(rates, rates[1:]))


# ============================================================================
# Gaussian outage
# ============================================================================

def test_gaussian_outage_inverts_rates(geometry, moments):
    params = point(epsilon=0.2)
    assert gaussian_outage("MAC", mac_upper_bound(params, moments).rate, params, geometry) == pytest.approx(0.2)
    assert gaussian_outage(Strategy.AF, af_outage_rate(params, geometry).rate, params, geometry) == pytest.approx(0.2)
    assert gaussian_outage("DF", df_outage_rate_exact(params, geometry).rate, params, geometry) == pytest.approx(0.2, abs=1e-8)
    with pytest.raises(ValueError):
        gaussian_outage("XYZ", 1.0, params, geometry)
