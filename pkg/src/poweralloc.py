"""
Power Allocation Module - Optimal source/relay power split alpha.

AF at a general SNR is maximized numerically by golden-section search
(gamma_AF is quasiconcave in alpha, hence unimodal on the search interval).
The limiting regimes of AF and the small-outage DF rate have closed forms.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Tuple

from .analytic import (
    Regime,
    SystemParams,
    af_high_snr_snr,
    af_received_snr,
    df_outage_rate_approx,
)
from .errors import DomainError
from .topology import NetworkGeometry, TopologyMoments

logger = logging.getLogger(__name__)


# ============================================================================
# CONFIGURATION
# ============================================================================

# Search interval is [ALPHA_MARGIN, 1 - ALPHA_MARGIN]
ALPHA_MARGIN: float = 1e-6

# Absolute tolerance on alpha
ALPHA_TOL: float = 1e-6

# Fallback split when the objective is identically zero
DEGENERATE_ALPHA: float = 0.5

INV_PHI: float = (math.sqrt(5.0) - 1.0) / 2.0         # 1 / phi
INV_PHI_SQUARE: float = (3.0 - math.sqrt(5.0)) / 2.0  # 1 / phi^2


class AlphaMethod(str, Enum):
    """How an optimal alpha was obtained."""
    GOLDEN_SECTION = "GOLDEN_SECTION"
    CLOSED_FORM_LOW = "CLOSED_FORM_LOW"
    CLOSED_FORM_HIGH = "CLOSED_FORM_HIGH"
    CLOSED_FORM_DF = "CLOSED_FORM_DF"


@dataclass(frozen=True)
class AlphaResult:
    """Optimal power fraction and the objective it attains."""
    alpha_opt: float
    objective_value: float
    method: AlphaMethod
    iterations: int = 0
    degenerate: bool = False


# ============================================================================
# GOLDEN-SECTION SEARCH
# ============================================================================

def golden_section_max(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = ALPHA_TOL,
) -> Tuple[float, float, int]:
    """
    Maximize a unimodal function on [a, b].

    Args:
        f: Objective
        a: Left end of the bracket
        b: Right end of the bracket
        tol: Final bracket width

    Returns:
        Tuple of (argmax, max, iterations)
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x), 0

    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    for _ in range(n - 1):
        if yc > yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    if yc > yd:
        return c, yc, n
    return d, yd, n


# ============================================================================
# AMPLIFY-AND-FORWARD
# ============================================================================

def optimize_af_alpha(params: SystemParams, g: NetworkGeometry) -> AlphaResult:
    """
    Maximize gamma_AF over alpha by golden-section search.

    At p = 1 the objective is identically zero; alpha = 0.5 is returned
    with the degenerate flag set.
    """
    if params.p == 1.0:
        logger.warning("AF objective is flat at p = 1; returning alpha = 0.5")
        return AlphaResult(
            alpha_opt=DEGENERATE_ALPHA,
            objective_value=0.0,
            method=AlphaMethod.GOLDEN_SECTION,
            degenerate=True,
        )

    def objective(alpha: float) -> float:
        return af_received_snr(params.with_(alpha=alpha), g)

    alpha, value, iterations = golden_section_max(objective, ALPHA_MARGIN, 1.0 - ALPHA_MARGIN)
    logger.debug(f"AF alpha_opt={alpha:.8f} (gamma_AF={value:.6g}, {iterations} iterations)")
    return AlphaResult(
        alpha_opt=alpha,
        objective_value=value,
        method=AlphaMethod.GOLDEN_SECTION,
        iterations=iterations,
    )


def af_alpha_high_snr(p: float, m: TopologyMoments) -> float:
    """sqrt((1 - p) E(rho_iD/rho_Si)) / (1 + sqrt((1 - p) E(rho_iD/rho_Si)))."""
    if p >= 1.0:
        raise DomainError("high-SNR AF alpha undefined at p = 1")
    root = math.sqrt((1.0 - p) * m.e_ratio)
    return root / (1.0 + root)


def af_alpha_closed_form(params: SystemParams, m: TopologyMoments, regime: Regime) -> AlphaResult:
    """Limiting-regime AF optimum: 0.5 at low SNR, af_alpha_high_snr at high SNR."""
    if Regime(regime) is Regime.LOW:
        alpha = 0.5
        value = (1.0 - params.p) * alpha * (1.0 - alpha) * params.gamma0 ** 2 * m.e_product
        return AlphaResult(alpha_opt=alpha, objective_value=value, method=AlphaMethod.CLOSED_FORM_LOW)

    alpha = af_alpha_high_snr(params.p, m)
    return AlphaResult(
        alpha_opt=alpha,
        objective_value=af_high_snr_snr(params.with_(alpha=alpha), m),
        method=AlphaMethod.CLOSED_FORM_HIGH,
    )


# ============================================================================
# DECODE-AND-FORWARD
# ============================================================================

def df_alpha_opt(params: SystemParams, m: TopologyMoments) -> float:
    """Maximizer of the small-outage DF rate: sqrt(eps(1-p)E)/(1 + sqrt(eps(1-p)E))."""
    if params.p >= 1.0:
        raise DomainError("DF alpha undefined at p = 1")
    root = math.sqrt(params.epsilon * (1.0 - params.p) * m.e_ratio)
    return root / (1.0 + root)


def df_alpha_result(params: SystemParams, m: TopologyMoments) -> AlphaResult:
    """df_alpha_opt packaged with the DF rate it attains."""
    alpha = df_alpha_opt(params, m)
    return AlphaResult(
        alpha_opt=alpha,
        objective_value=df_outage_rate_approx(params.with_(alpha=alpha), m).rate,
        method=AlphaMethod.CLOSED_FORM_DF,
    )
