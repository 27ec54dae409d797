"""
Analytic Module - Asymptotic (N -> infinity) epsilon-outage rates.

This module provides:
1. The MAC cut-set upper bound
2. The AF received SNR and epsilon-outage rate, with its high/low-SNR limits
3. The DF decode probability, survivor density, exact outage pipeline and
   small-outage closed form
4. Rate-loss-under-attack analysis for both strategies

All rates are in bits per channel use. N0 is normalized to 1, so gamma0 = P/N0
carries all power normalization.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple, Optional, Union

import numpy as np

from .errors import ConfigError, DomainError, RootFindingError
from .topology import (
    Coordinate,
    NetworkGeometry,
    TopologyMoments,
    af_integrals,
    compute_moments,
    expect,
)

logger = logging.getLogger(__name__)


# ============================================================================
# CONFIGURATION
# ============================================================================

LN2: float = math.log(2.0)

# Exact DF rate search
BISECTION_TOL: float = 1e-10
MAX_DOUBLINGS: int = 200

# exp() overflows past this argument
_MAX_EXP_ARG: float = 709.0


class Strategy(str, Enum):
    """Rate expressions produced by this module."""
    MAC_UPPER = "MAC_UPPER"
    AF = "AF"
    DF_EXACT = "DF_EXACT"
    DF_APPROX = "DF_APPROX"


class Regime(str, Enum):
    """SNR regime of a limiting formula (chosen by the caller)."""
    LOW = "LOW"
    HIGH = "HIGH"


class DecodeMode(str, Enum):
    """Exact Rayleigh decode probability or its first-order linearization."""
    EXACT = "EXACT"
    APPROX = "APPROX"


REGIME_NOMINAL = "nominal"
REGIME_CLAMPED = "linearization-clamped"


# ============================================================================
# DATA CLASSES
# ============================================================================

@dataclass(frozen=True)
class SystemParams:
    """Transmit SNR, attack probability, source power fraction and outage target."""
    gamma0: float
    p: float
    alpha: float
    epsilon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma0) and self.gamma0 > 0):
            raise ConfigError(f"transmit SNR must be positive and finite, got {self.gamma0}", key="system.gamma0")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"attack probability must be in [0, 1], got {self.p}", key="system.p")
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigError(f"power fraction must be in [0, 1), got {self.alpha}", key="system.alpha")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"outage target must be in (0, 1), got {self.epsilon}", key="system.epsilon")

    def with_(self, **changes: float) -> "SystemParams":
        """Copy with some fields replaced."""
        return replace(self, **changes)

    @property
    def survivor_power(self) -> float:
        """(1 - p) gamma0, the attack-thinned transmit SNR."""
        return (1.0 - self.p) * self.gamma0


@dataclass(frozen=True)
class RateResult:
    """An epsilon-outage rate and the equivalent Rayleigh-channel SNR behind it."""
    strategy: Strategy
    rate: float
    alpha_used: float
    received_snr: float
    regime: str = REGIME_NOMINAL


class RateLoss(NamedTuple):
    """Rate lost to random attacks: absolute bits and fraction 1 - R/R0."""
    absolute: float
    fraction: float


# ============================================================================
# HELPERS
# ============================================================================

def outage_log_term(epsilon: float) -> float:
    """ln(1 / (1 - epsilon))."""
    return -math.log1p(-epsilon)


def rate_to_snr(rate: float) -> float:
    """2^(2R) - 1, the SNR needed for rate R on a half-duplex link."""
    exponent = 2.0 * rate * LN2
    if exponent > _MAX_EXP_ARG:
        return math.inf
    return math.expm1(exponent)


def snr_to_rate(snr: float) -> float:
    """0.5 log2(1 + snr)."""
    return 0.5 * math.log1p(snr) / LN2


def rayleigh_outage_rate(snr: float, epsilon: float) -> float:
    """epsilon-outage rate of a Rayleigh channel with mean SNR snr."""
    return snr_to_rate(snr * outage_log_term(epsilon))


def rayleigh_outage_prob(rate: float, snr: float) -> float:
    """Outage probability of a Rayleigh channel with mean SNR snr at rate R."""
    if rate <= 0.0:
        return 0.0
    if snr <= 0.0:
        return 1.0
    return -math.expm1(-rate_to_snr(rate) / snr)


# ============================================================================
# MAC CUT-SET UPPER BOUND
# ============================================================================

def mac_upper_snr(params: SystemParams, m: TopologyMoments) -> float:
    """gamma_upper = (1 - p)(1 - alpha) gamma0 E(rho_iD)."""
    return params.survivor_power * (1.0 - params.alpha) * m.e_rho_d


def mac_upper_bound(params: SystemParams, m: TopologyMoments) -> RateResult:
    """epsilon-outage capacity upper bound from the relays-to-destination cut."""
    snr = mac_upper_snr(params, m)
    return RateResult(
        strategy=Strategy.MAC_UPPER,
        rate=rayleigh_outage_rate(snr, params.epsilon),
        alpha_used=params.alpha,
        received_snr=snr,
    )


def upper_outage_ratio(normalized_snr: float, params: SystemParams, m: TopologyMoments) -> float:
    """
    Outage probability of the upper bound divided by (2^(2C) - 1)/gamma0.

    Args:
        normalized_snr: u = (2^(2C) - 1) / gamma0
        params: System parameters
        m: Topology moments

    Returns:
        (1 - exp(-u gamma0 / gamma_upper)) / u; tends to
        1 / ((1 - p)(1 - alpha) E(rho_iD)) as u -> 0
    """
    if normalized_snr <= 0:
        raise DomainError("normalized SNR must be positive")
    scale = (1.0 - params.p) * (1.0 - params.alpha) * m.e_rho_d
    if scale == 0.0:
        return math.inf
    return -math.expm1(-normalized_snr / scale) / normalized_snr


# ============================================================================
# AMPLIFY-AND-FORWARD
# ============================================================================

def af_received_snr(params: SystemParams, g: NetworkGeometry) -> float:
    """gamma_AF = (1 - p) A / (1 + (1 - p) B)."""
    if params.alpha == 0.0 or params.p == 1.0:
        return 0.0
    a_term, b_term = af_integrals(g, params.alpha, params.gamma0)
    survive = 1.0 - params.p
    return survive * a_term / (1.0 + survive * b_term)


def af_outage_rate(params: SystemParams, g: NetworkGeometry) -> RateResult:
    """epsilon-outage rate of the AF strategy."""
    snr = af_received_snr(params, g)
    return RateResult(
        strategy=Strategy.AF,
        rate=rayleigh_outage_rate(snr, params.epsilon),
        alpha_used=params.alpha,
        received_snr=snr,
    )


def af_high_snr_snr(params: SystemParams, m: TopologyMoments) -> float:
    """
    High-SNR form of gamma_AF:
    (1 - p)(1 - alpha) gamma0 E(rho_iD) / (1 + (1 - p)((1 - alpha)/alpha) E(rho_iD/rho_Si)).
    """
    if params.alpha == 0.0:
        return 0.0
    survive = 1.0 - params.p
    spread = survive * (1.0 - params.alpha) / params.alpha * m.e_ratio
    return survive * (1.0 - params.alpha) * params.gamma0 * m.e_rho_d / (1.0 + spread)


def af_high_snr_gap(params: SystemParams, m: TopologyMoments) -> float:
    """
    Constant gap in bits between the upper bound and the AF rate at high SNR.

    Raises:
        DomainError: If alpha is 0 (the gap is unbounded)
    """
    alpha = params.alpha
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"AF gap undefined for alpha = {alpha}")
    return 0.5 * math.log2(1.0 / (1.0 - alpha) + (1.0 - params.p) / alpha * m.e_ratio)


def af_rate_loss(params: SystemParams, m: TopologyMoments, regime: Regime) -> RateLoss:
    """
    Rate loss of AF due to attacks relative to the attack-free (p = 0) rate.

    LOW: linearized rates, R = (1 - p) R0, so the fraction is exactly p.
    HIGH: the loss is 0.5 log2(1/(1 - p)) - C1 bits, with
    C1 = 0.5 log2((1 + K) / (1 + (1 - p) K)) and K = ((1 - alpha)/alpha) E(rho_iD/rho_Si).
    """
    regime = Regime(regime)
    p, alpha = params.p, params.alpha
    if p == 0.0:
        return RateLoss(absolute=0.0, fraction=0.0)
    log_term = outage_log_term(params.epsilon)

    if regime is Regime.LOW:
        reference = 0.5 * alpha * (1.0 - alpha) * params.gamma0 ** 2 * m.e_product * log_term / LN2
        return RateLoss(absolute=p * reference, fraction=p)

    if p == 1.0:
        raise DomainError("high-SNR AF rate loss is unbounded at p = 1")
    if alpha == 0.0:
        raise DomainError("high-SNR AF rate loss undefined at alpha = 0")
    spread = (1.0 - alpha) / alpha * m.e_ratio
    c1 = 0.5 * math.log2((1.0 + spread) / (1.0 + (1.0 - p) * spread))
    absolute = 0.5 * math.log2(1.0 / (1.0 - p)) - c1
    reference = 0.5 * math.log2((1.0 - alpha) * params.gamma0 * m.e_rho_d / (1.0 + spread) * log_term)
    if reference <= 0.0:
        raise DomainError(f"high-SNR AF reference rate is {reference:.4g} bits; regime does not apply")
    return RateLoss(absolute=absolute, fraction=absolute / reference)


def af_low_snr_ratio(
    params: SystemParams,
    m: TopologyMoments,
    g: Optional[NetworkGeometry] = None,
) -> float:
    """
    R_AF / (epsilon gamma0) at the given operating point.

    With a geometry the exact gamma_AF is used; without one, its low-SNR
    form (1 - p) alpha (1 - alpha) gamma0^2 E(rho_Si rho_iD).
    """
    if params.p == 1.0:
        return 0.0
    if g is not None:
        snr = af_received_snr(params, g)
    else:
        snr = (1.0 - params.p) * params.alpha * (1.0 - params.alpha) * params.gamma0 ** 2 * m.e_product
    return rayleigh_outage_rate(snr, params.epsilon) / (params.epsilon * params.gamma0)


# ============================================================================
# DECODE-AND-FORWARD
# ============================================================================

def _decode_exact(rho_s: np.ndarray, snr_needed: float, params: SystemParams) -> np.ndarray:
    if params.alpha == 0.0:
        return np.zeros_like(rho_s)
    if snr_needed == 0.0:
        return np.ones_like(rho_s)
    return np.exp(-snr_needed / (params.alpha * params.gamma0 * rho_s))


def _decode_linear(rho_s: np.ndarray, snr_needed: float, params: SystemParams) -> np.ndarray:
    if params.alpha == 0.0:
        return np.zeros_like(rho_s)
    return np.clip(1.0 - snr_needed / (params.alpha * params.gamma0 * rho_s), 0.0, 1.0)


def df_decode_prob(
    s: Coordinate,
    rate: float,
    params: SystemParams,
    g: NetworkGeometry,
    mode: DecodeMode = DecodeMode.EXACT,
) -> Union[float, np.ndarray]:
    """
    Probability that a relay at s decodes the source codeword at rate R.

    EXACT: exp(-(2^(2R) - 1) / (alpha gamma0 rho_Si(s))).
    APPROX: 1 - (2^(2R) - 1) / (alpha gamma0 rho_Si(s)), clamped to [0, 1].
    At alpha = 0 the source is silent and the probability is 0.
    """
    if rate < 0:
        raise DomainError(f"rate must be non-negative, got {rate}")
    rho_s = np.asarray(g.rho_s(np.asarray(s, dtype=float)), dtype=float)
    decode = _decode_exact if DecodeMode(mode) is DecodeMode.EXACT else _decode_linear
    prob = decode(rho_s, rate_to_snr(rate), params)
    return float(prob) if prob.ndim == 0 else prob


def df_decode_prob_mean(rate: float, params: SystemParams, g: NetworkGeometry) -> float:
    """p0 = E[p0(s)], the average decode probability over relay locations."""
    snr_needed = rate_to_snr(rate)
    return expect(g, lambda rs, rd: _decode_exact(rs, snr_needed, params))


def df_survivor_pdf(
    s: Coordinate,
    rate: float,
    params: SystemParams,
    g: NetworkGeometry,
) -> Union[float, np.ndarray]:
    """
    Density of decoding relays over the region: f(s) = p(s) p0(s) / p0.

    Raises:
        DomainError: If no relay can ever decode (p0 = 0)
    """
    mean = df_decode_prob_mean(rate, params, g)
    if mean <= 0.0:
        raise DomainError("survivor density undefined: average decode probability is 0")
    points = np.asarray(s, dtype=float)
    density = g.density(points) * df_decode_prob(points, rate, params, g) / mean
    return float(density) if np.ndim(density) == 0 else density


def df_received_snr(rate: float, params: SystemParams, g: NetworkGeometry) -> float:
    """gamma_DF = (1 - p)(1 - alpha) gamma0 E[rho_iD p0(s)]."""
    snr_needed = rate_to_snr(rate)
    if params.p == 1.0 or params.alpha == 0.0 or math.isinf(snr_needed):
        return 0.0
    weighted = expect(g, lambda rs, rd: rd * _decode_exact(rs, snr_needed, params))
    return params.survivor_power * (1.0 - params.alpha) * weighted


def df_forwarding_moment(rate: float, params: SystemParams, g: NetworkGeometry) -> float:
    """E_1(rho_iD): the mean forward gain under the survivor density f(s)."""
    snr_needed = rate_to_snr(rate)
    mean = df_decode_prob_mean(rate, params, g)
    if mean <= 0.0:
        raise DomainError("forwarding moment undefined: average decode probability is 0")
    return expect(g, lambda rs, rd: rd * _decode_exact(rs, snr_needed, params)) / mean


def df_outage_prob(rate: float, params: SystemParams, g: NetworkGeometry) -> float:
    """p_DF(R) = 1 - exp(-(2^(2R) - 1) / gamma_DF(R)); 1 when gamma_DF = 0 and R > 0."""
    if rate < 0:
        raise DomainError(f"rate must be non-negative, got {rate}")
    if rate == 0.0:
        return 0.0
    return rayleigh_outage_prob(rate, df_received_snr(rate, params, g))


def df_outage_rate_exact(params: SystemParams, g: NetworkGeometry) -> RateResult:
    """
    Largest R with p_DF(R) <= epsilon, by bisection on the monotone outage curve.

    Raises:
        RootFindingError: If no bracketing rate is found within MAX_DOUBLINGS doublings
    """
    epsilon = params.epsilon
    low, high = 0.0, 1.0
    doublings = 0
    while df_outage_prob(high, params, g) <= epsilon:
        low, high = high, 2.0 * high
        doublings += 1
        if doublings > MAX_DOUBLINGS:
            raise RootFindingError(f"could not bracket the DF rate after {MAX_DOUBLINGS} doublings")

    steps = 0
    while high - low > BISECTION_TOL:
        mid = 0.5 * (low + high)
        if df_outage_prob(mid, params, g) <= epsilon:
            low = mid
        else:
            high = mid
        steps += 1

    logger.debug(f"DF exact rate {low:.12g} after {doublings} doublings and {steps} bisections")
    return RateResult(
        strategy=Strategy.DF_EXACT,
        rate=low,
        alpha_used=params.alpha,
        received_snr=df_received_snr(low, params, g),
    )


def df_outage_rate_approx(params: SystemParams, m: TopologyMoments) -> RateResult:
    """
    Small-outage closed form of the DF rate:
    0.5 log2(1 + (1 - p)(1 - alpha) gamma0 E(rho_iD) eps / (1 + eps (1 - p)((1 - alpha)/alpha) E(rho_iD/rho_Si))).

    The regime is flagged as clamped when the linearized decode probability
    would go negative at the relay farthest from the source.

    Raises:
        DomainError: If alpha is 0
    """
    alpha, epsilon = params.alpha, params.epsilon
    if alpha == 0.0:
        raise DomainError("DF small-outage rate undefined at alpha = 0")
    survive = 1.0 - params.p
    decoding_noise = epsilon * survive * (1.0 - alpha) / alpha * m.e_ratio
    effective = survive * (1.0 - alpha) * params.gamma0 * m.e_rho_d * epsilon / (1.0 + decoding_noise)
    rate = snr_to_rate(effective)

    # Linearized gamma_DF at this rate; x = 2^(2R) - 1 = effective
    received = survive * (1.0 - alpha) * params.gamma0 * (m.e_rho_d - effective / (alpha * params.gamma0) * m.e_ratio)
    regime = REGIME_NOMINAL
    if m.min_rho_s is not None and effective > alpha * params.gamma0 * m.min_rho_s:
        regime = REGIME_CLAMPED
        logger.debug(f"DF linearization clamps at alpha={alpha:.4g}, gamma0={params.gamma0:.4g}")

    return RateResult(
        strategy=Strategy.DF_APPROX,
        rate=rate,
        alpha_used=alpha,
        received_snr=max(received, 0.0),
        regime=regime,
    )


def df_rate_loss(params: SystemParams, m: TopologyMoments, regime: Regime) -> RateLoss:
    """
    Rate loss of DF due to attacks, from the small-outage closed form.

    LOW: fraction = 1 - (1 - p)(1 + eps K)/(1 + (1 - p) eps K), K = ((1 - alpha)/alpha) E(rho_iD/rho_Si).
    HIGH: absolute = 0.5 log2(1/(1 - p)) - C2, C2 = 0.5 log2((1 + eps K)/(1 + eps (1 - p) K)).
    """
    regime = Regime(regime)
    p, alpha, epsilon = params.p, params.alpha, params.epsilon
    if p == 0.0:
        return RateLoss(absolute=0.0, fraction=0.0)
    if alpha == 0.0:
        raise DomainError("DF rate loss undefined at alpha = 0")
    spread = (1.0 - alpha) / alpha * m.e_ratio
    attack_free = (1.0 - alpha) * params.gamma0 * m.e_rho_d * epsilon / (1.0 + epsilon * spread)

    if regime is Regime.LOW:
        kept = (1.0 - p) * (1.0 + epsilon * spread) / (1.0 + (1.0 - p) * epsilon * spread)
        reference = 0.5 * attack_free / LN2
        return RateLoss(absolute=reference * (1.0 - kept), fraction=1.0 - kept)

    if p == 1.0:
        raise DomainError("high-SNR DF rate loss is unbounded at p = 1")
    c2 = 0.5 * math.log2((1.0 + epsilon * spread) / (1.0 + epsilon * (1.0 - p) * spread))
    absolute = 0.5 * math.log2(1.0 / (1.0 - p)) - c2
    reference = 0.5 * math.log2(attack_free)
    if reference <= 0.0:
        raise DomainError(f"high-SNR DF reference rate is {reference:.4g} bits; regime does not apply")
    return RateLoss(absolute=absolute, fraction=absolute / reference)


def df_asymptotic_ratio(params: SystemParams, m: TopologyMoments) -> float:
    """Common epsilon -> 0 limit of (2^(2C) - 1)/(eps gamma0) for the upper bound and DF."""
    return (1.0 - params.p) * (1.0 - params.alpha) * m.e_rho_d


def small_outage_capacity(params: SystemParams, m: TopologyMoments) -> float:
    """C ~ 0.5 log2(1 + (1 - p)(1 - alpha) gamma0 E(rho_iD) eps) for small eps."""
    return snr_to_rate(df_asymptotic_ratio(params, m) * params.gamma0 * params.epsilon)


# ============================================================================
# LARGE-N GAUSSIAN OUTAGE
# ============================================================================

def gaussian_outage(strategy: str, rate: float, params: SystemParams, g: NetworkGeometry) -> float:
    """
    Closed-form (N -> infinity) outage probability at target rate R.

    Args:
        strategy: "MAC", "AF" or "DF"
        rate: Target rate in bits
        params: System parameters
        g: Geometry

    Returns:
        1 - exp(-(2^(2R) - 1)/gamma) with the strategy's equivalent SNR
    """
    key = str(getattr(strategy, "value", strategy)).upper()
    if key in ("MAC", "MAC_UPPER"):
        return rayleigh_outage_prob(rate, mac_upper_snr(params, compute_moments(g)))
    if key == "AF":
        return rayleigh_outage_prob(rate, af_received_snr(params, g))
    if key in ("DF", "DF_EXACT"):
        return df_outage_prob(rate, params, g)
    raise ValueError(f"Unknown strategy: {strategy}")
