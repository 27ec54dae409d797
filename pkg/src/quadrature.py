"""
Adaptive composite Gauss-Legendre quadrature.

Integrands are vectorized callables: they receive a numpy array of abscissae
and return an array of the same shape. Each panel is estimated with an
n-point Gauss-Legendre rule and compared against the sum of its two halves;
panels that disagree are bisected until the local error falls below the
panel's share of the global tolerance.
"""

import logging
import math
from functools import lru_cache
from typing import Callable, List, Tuple

import numpy as np

from .errors import QuadratureError

logger = logging.getLogger(__name__)


# ============================================================================
# CONFIGURATION
# ============================================================================

# Relative tolerance requested from every expectation functional
DEFAULT_REL_TOL: float = 1e-9

# Maximum number of bisections of any panel
DEFAULT_MAX_DEPTH: int = 40

# Gauss-Legendre points per panel
DEFAULT_ORDER: int = 10

# Absolute floor so that integrals of identically zero functions terminate
ABS_FLOOR: float = 1e-300

VectorFunction = Callable[[np.ndarray], np.ndarray]


@lru_cache(maxsize=8)
def _legendre_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    return np.polynomial.legendre.leggauss(order)


def _panel(f: VectorFunction, a: float, b: float, order: int) -> float:
    nodes, weights = _legendre_rule(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    values = np.asarray(f(mid + half * nodes), dtype=float)
    return float(half * np.dot(weights, values))


def integrate(
    f: VectorFunction,
    a: float,
    b: float,
    rel_tol: float = DEFAULT_REL_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
    order: int = DEFAULT_ORDER,
) -> float:
    """
    Integrate a vectorized function over [a, b].

    Args:
        f: Vectorized integrand
        a: Lower bound
        b: Upper bound
        rel_tol: Relative tolerance on the whole integral
        max_depth: Maximum bisection depth of any panel
        order: Gauss-Legendre points per panel

    Returns:
        The integral estimate

    Raises:
        QuadratureError: If a panel still fails its tolerance at max_depth
        ValueError: If the integrand is not finite on the interval
    """
    if a == b:
        return 0.0
    if a > b:
        return -integrate(f, b, a, rel_tol, max_depth, order)

    span = b - a
    whole = _panel(f, a, b, order)
    if not math.isfinite(whole):
        raise ValueError(f"Integrand is not finite on [{a}, {b}]")

    # Global reference magnitude, refreshed as panels are accepted
    reference = abs(whole)

    accepted: List[float] = []
    stack: List[Tuple[float, float, float, int]] = [(a, b, whole, 0)]
    refinements = 0

    while stack:
        lo, hi, coarse, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _panel(f, lo, mid, order)
        right = _panel(f, mid, hi, order)
        fine = left + right
        error = abs(fine - coarse)
        allowed = max(rel_tol * reference * (hi - lo) / span, ABS_FLOOR)

        if error <= allowed:
            accepted.append(fine)
            continue

        if depth + 1 >= max_depth:
            raise QuadratureError(
                f"Panel [{lo:.6g}, {hi:.6g}] did not converge after {max_depth} bisections",
                achieved_tolerance=error / max(reference, ABS_FLOOR),
            )

        refinements += 1
        reference = max(reference, abs(fine))
        stack.append((mid, hi, right, depth + 1))
        stack.append((lo, mid, left, depth + 1))

    result = math.fsum(accepted)
    logger.debug(f"integrate[{a:.6g}, {b:.6g}]: {result:.12g} after {refinements} refinements")
    return result


def integrate_box(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    lower: Tuple[float, float],
    upper: Tuple[float, float],
    rel_tol: float = DEFAULT_REL_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
    order: int = DEFAULT_ORDER,
) -> float:
    """
    Integrate f(x, y) over an axis-aligned rectangle as an iterated integral.

    The inner integral over y is evaluated adaptively for each outer node x.
    """
    def outer(xs: np.ndarray) -> np.ndarray:
        return np.array([
            integrate(
                lambda ys, x=x: f(np.full_like(ys, x), ys),
                lower[1], upper[1], rel_tol, max_depth, order,
            )
            for x in np.ravel(xs)
        ]).reshape(np.shape(xs))

    return integrate(outer, lower[0], upper[0], rel_tol, max_depth, order)
