"""
Topology Module - Network geometry, path loss and relay-location expectations.

This module provides:
1. NetworkGeometry: source/destination, relay region, path-loss exponent, dead zone
2. Path-loss evaluation and dead-zone validation
3. Relay position sampling from the (uniform) relay density
4. Expectation functionals over relay location by adaptive quadrature
"""

import itertools
import logging
from dataclasses import InitVar, dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import GeometryError
from .quadrature import DEFAULT_REL_TOL, integrate, integrate_box

logger = logging.getLogger(__name__)

Coordinate = Union[float, Sequence[float], np.ndarray]

# f(rho_s, rho_d) -> values, evaluated elementwise on arrays
GainFunctional = Callable[[np.ndarray, np.ndarray], np.ndarray]


# ============================================================================
# CONFIGURATION
# ============================================================================

# Line network used throughout the numerical study
DEFAULT_SOURCE: float = 0.0
DEFAULT_DEST: float = 12.0
DEFAULT_REGION: Tuple[float, float] = (1.0, 11.0)
DEFAULT_THETA: float = 2.0
DEFAULT_S0: float = 1.0

# Density normalization tolerance (relative)
NORMALIZATION_TOL: float = 1e-9


# ============================================================================
# PATH LOSS
# ============================================================================

def _distance(a: Coordinate, b: Coordinate) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 0:
        return np.abs(b - a)
    # Vector endpoint: b is one point or an array of points along the last axis
    return np.linalg.norm(b - a, axis=-1)


def pathloss(a: Coordinate, b: Coordinate, theta: float) -> Union[float, np.ndarray]:
    """
    Average channel power gain between two points: ||a - b||^(-theta).

    Args:
        a: First point (scalar for 1-D, length-2 vector for 2-D)
        b: Second point, or an array of points
        theta: Path-loss exponent

    Returns:
        The gain (float for a single pair, array otherwise)

    Raises:
        ValueError: If any pair of points coincides
    """
    distance = _distance(a, b)
    if np.any(distance == 0.0):
        raise ValueError("pathloss undefined for coincident points")
    gain = distance ** (-theta)
    return float(gain) if np.ndim(gain) == 0 else gain


# ============================================================================
# DATA CLASSES
# ============================================================================

def _as_point(value: Coordinate) -> Tuple[float, ...]:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(value, dtype=float)))


@dataclass(frozen=True)
class NetworkGeometry:
    """
    Source/destination positions, relay region and propagation constants.

    1-D geometries use length-1 tuples; the relay region is the interval
    [region_min, region_max]. 2-D geometries use an axis-aligned rectangle.
    The relay density is uniform over the region.
    """
    source: Tuple[float, ...]
    dest: Tuple[float, ...]
    region_min: Tuple[float, ...]
    region_max: Tuple[float, ...]
    theta: float = DEFAULT_THETA
    s0: float = DEFAULT_S0
    dimension: int = field(default=1)
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        for name in ("source", "dest", "region_min", "region_max"):
            object.__setattr__(self, name, _as_point(getattr(self, name)))
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "s0", float(self.s0))
        if validate:
            report = validate_geometry(self)
            if not report.ok:
                raise GeometryError("; ".join(report.violations), key=report.keys[0])

    @property
    def region_volume(self) -> float:
        """Length (1-D) or area (2-D) of the relay region."""
        return float(np.prod(np.subtract(self.region_max, self.region_min)))

    @property
    def max_gain(self) -> float:
        """Largest path gain any relay can see: s0^(-theta)."""
        return self.s0 ** (-self.theta)

    def density(self, points: np.ndarray) -> np.ndarray:
        """Relay location PDF p(s) (uniform)."""
        shape = np.shape(points) if self.dimension == 1 else np.shape(points)[:-1]
        return np.full(shape, 1.0 / self.region_volume)

    def _endpoint(self, point: Tuple[float, ...]) -> Union[float, np.ndarray]:
        return point[0] if self.dimension == 1 else np.asarray(point)

    def rho_s(self, points: np.ndarray) -> np.ndarray:
        """Source-to-relay gains at the given relay positions."""
        return np.asarray(pathloss(self._endpoint(self.source), points, self.theta))

    def rho_d(self, points: np.ndarray) -> np.ndarray:
        """Relay-to-destination gains at the given relay positions."""
        return np.asarray(pathloss(self._endpoint(self.dest), points, self.theta))

    def distance_to_region(self, point: Tuple[float, ...]) -> float:
        """Euclidean distance from a point to the relay region."""
        nearest = np.clip(point, self.region_min, self.region_max)
        return float(np.linalg.norm(np.subtract(point, nearest)))


@dataclass(frozen=True)
class TopologyMoments:
    """Path-gain moments over the relay density (all dimensionless)."""
    e_rho_d: float     # E(rho_iD)
    e_rho_s: float     # E(rho_Si)
    e_ratio: float     # E(rho_iD / rho_Si)
    e_product: float   # E(rho_Si * rho_iD)
    min_rho_s: Optional[float] = None  # weakest source-to-relay gain over the region


@dataclass
class GeometryReport:
    """Result of validate_geometry: violated constraints and the config keys they map to."""
    violations: List[str] = field(default_factory=list)
    keys: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str, key: str) -> None:
        self.violations.append(message)
        self.keys.append(key)


def line_geometry(
    source: float = DEFAULT_SOURCE,
    dest: float = DEFAULT_DEST,
    region: Tuple[float, float] = DEFAULT_REGION,
    theta: float = DEFAULT_THETA,
    s0: float = DEFAULT_S0,
    validate: bool = True,
) -> NetworkGeometry:
    """Build a 1-D geometry; the defaults are the line network of the numerical study."""
    return NetworkGeometry(
        source=(source,),
        dest=(dest,),
        region_min=(region[0],),
        region_max=(region[1],),
        theta=theta,
        s0=s0,
        dimension=1,
        validate=validate,
    )


# ============================================================================
# VALIDATION
# ============================================================================

def validate_geometry(g: NetworkGeometry) -> GeometryReport:
    """
    Check the dead-zone, region and density constraints of a geometry.

    Args:
        g: Geometry to check (may have been built with validate=False)

    Returns:
        GeometryReport naming every violated constraint
    """
    report = GeometryReport()

    if g.dimension not in (1, 2):
        report.add(f"dimension must be 1 or 2, got {g.dimension}", "geometry.dimension")
        return report
    for name in ("source", "dest", "region_min", "region_max"):
        if len(getattr(g, name)) != g.dimension:
            report.add(f"{name} must have {g.dimension} coordinate(s)", f"geometry.{name}")
    if not report.ok:
        return report

    if not g.theta > 0:
        report.add(f"path-loss exponent must be positive, got {g.theta}", "geometry.theta")
    if not g.s0 > 0:
        report.add(f"dead-zone radius must be positive, got {g.s0}", "geometry.s0")
    if any(hi <= lo for lo, hi in zip(g.region_min, g.region_max)):
        report.add("relay region is degenerate (region_max must exceed region_min)", "geometry.region_max")
    if not report.ok:
        return report

    source_gap = g.distance_to_region(g.source)
    if source_gap < g.s0:
        report.add(
            f"source dead zone: dist(source, region) = {source_gap:.6g} < s0 = {g.s0:.6g}",
            "geometry.region_min",
        )
    dest_gap = g.distance_to_region(g.dest)
    if dest_gap < g.s0:
        report.add(
            f"destination dead zone: dist(dest, region) = {dest_gap:.6g} < s0 = {g.s0:.6g}",
            "geometry.region_max",
        )
    if not report.ok:
        return report

    mass = _integrate_region(g, lambda points: g.density(points))
    if abs(mass - 1.0) > NORMALIZATION_TOL:
        report.add(f"density normalization: integrates to {mass:.12g}", "geometry.density")

    return report


# ============================================================================
# SAMPLING
# ============================================================================

def sample_positions(g: NetworkGeometry, n: int, stream: np.random.Generator) -> np.ndarray:
    """
    Draw n i.i.d. relay positions from the relay density.

    Args:
        g: Geometry
        n: Number of relays (0 gives an empty array)
        stream: Caller-owned random generator

    Returns:
        Array of shape (n,) for 1-D or (n, 2) for 2-D
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if g.dimension == 1:
        return stream.uniform(g.region_min[0], g.region_max[0], size=n)
    return stream.uniform(g.region_min, g.region_max, size=(n, g.dimension))


# ============================================================================
# EXPECTATIONS
# ============================================================================

def _integrate_region(
    g: NetworkGeometry,
    integrand: Callable[[np.ndarray], np.ndarray],
    bounds: Optional[Tuple[float, float]] = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    if g.dimension == 1:
        lo, hi = bounds if bounds is not None else (g.region_min[0], g.region_max[0])
        return integrate(integrand, lo, hi, rel_tol=rel_tol)

    def planar(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return integrand(np.stack([xs, ys], axis=-1))

    return integrate_box(planar, g.region_min, g.region_max, rel_tol=rel_tol)


def expect(
    g: NetworkGeometry,
    f: GainFunctional,
    bounds: Optional[Tuple[float, float]] = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """
    Expectation of f(rho_S(s), rho_D(s)) over the relay density.

    Args:
        g: Geometry
        f: Vectorized functional of the two path gains
        bounds: Optional 1-D sub-interval; integrates p(s) f over it only
        rel_tol: Relative tolerance of the adaptive quadrature

    Returns:
        The integral of f * p over the region (or sub-interval)

    Raises:
        QuadratureError: If the quadrature fails to converge
    """
    if bounds is not None and g.dimension != 1:
        raise ValueError("bounds are only supported for 1-D geometries")

    def integrand(points: np.ndarray) -> np.ndarray:
        return np.asarray(f(g.rho_s(points), g.rho_d(points)), dtype=float) * g.density(points)

    return _integrate_region(g, integrand, bounds, rel_tol)


def _farthest_corner(g: NetworkGeometry, point: Tuple[float, ...]) -> Tuple[float, ...]:
    corners = itertools.product(*zip(g.region_min, g.region_max))
    return max(corners, key=lambda c: float(np.linalg.norm(np.subtract(c, point))))


@lru_cache(maxsize=64)
def compute_moments(g: NetworkGeometry) -> TopologyMoments:
    """Compute (and memoize) the path-gain moments of a geometry."""
    moments = TopologyMoments(
        e_rho_d=expect(g, lambda rs, rd: rd),
        e_rho_s=expect(g, lambda rs, rd: rs),
        e_ratio=expect(g, lambda rs, rd: rd / rs),
        e_product=expect(g, lambda rs, rd: rs * rd),
        min_rho_s=pathloss(g.source, _farthest_corner(g, g.source), g.theta),
    )
    logger.debug(f"Topology moments: {moments}")
    return moments


def af_integrals(g: NetworkGeometry, alpha: float, gamma0: float) -> Tuple[float, float]:
    """
    The AF integrals (A, B) for a power split and transmit SNR.

    A = E(g_S g_D / (1 + g_S)), B = E(g_D / (1 + g_S)), where
    g_S = alpha gamma0 rho_S and g_D = (1 - alpha) gamma0 rho_D.
    """
    def snr_s(rs: np.ndarray) -> np.ndarray:
        return alpha * gamma0 * rs

    def snr_d(rd: np.ndarray) -> np.ndarray:
        return (1.0 - alpha) * gamma0 * rd

    a_term = expect(g, lambda rs, rd: snr_s(rs) * snr_d(rd) / (1.0 + snr_s(rs)))
    b_term = expect(g, lambda rs, rd: snr_d(rd) / (1.0 + snr_s(rs)))
    return a_term, b_term
