"""
Tests for geometry validation, path loss and relay-location expectations.

The line network (source 0, destination 12, relays on [1, 11], theta 2)
has closed-form moments, so the quadrature is checked to 1e-8 there.
"""

import math

import numpy as np
import pytest

from src.errors import ConfigError, GeometryError
from src.topology import (
    NetworkGeometry,
    compute_moments,
    expect,
    line_geometry,
    pathloss,
    sample_positions,
    validate_geometry,
)
from tests.conftest import E_PRODUCT, E_RATIO, E_RHO_D


# ============================================================================
# Path loss
# ============================================================================

@pytest.mark.parametrize(
    "a, b, theta, expected",
    [
        (0.0, 1.0, 2.0, 1.0),
        (0.0, 12.0, 2.0, 1.0 / 144.0),
        ((0.0, 0.0), (2.0, 0.0), 3.0, 0.125),
    ],
)
def test_pathloss_examples(a, b, theta, expected):
    assert pathloss(a, b, theta) == pytest.approx(expected, rel=1e-15)


def test_pathloss_vectorized():
    gains = pathloss(0.0, np.array([1.0, 2.0, 4.0]), 2.0)
    np.testing.assert_allclose(gains, [1.0, 0.25, 0.0625])


def test_pathloss_coincident_points():
    with pytest.raises(ValueError):
        pathloss(3.0, 3.0, 2.0)


# ============================================================================
# Validation
# ============================================================================

def test_default_geometry_is_valid(geometry):
    assert validate_geometry(geometry).ok
    assert geometry.region_volume == 10.0
    assert geometry.max_gain == 1.0


def test_source_dead_zone_reported():
    g = line_geometry(region=(0.5, 11.0), validate=False)
    report = validate_geometry(g)
    assert not report.ok
    assert any("source dead zone" in v for v in report.violations)
    assert report.keys[0] == "geometry.region_min"


def test_destination_dead_zone_reported():
    g = line_geometry(region=(1.0, 11.5), validate=False)
    report = validate_geometry(g)
    assert any("destination dead zone" in v for v in report.violations)
    assert "geometry.region_max" in report.keys


def test_invalid_geometry_raises_keyed_error():
    with pytest.raises(GeometryError) as info:
        line_geometry(region=(0.5, 11.0))
    assert isinstance(info.value, ConfigError)
    assert info.value.key == "geometry.region_min"


def test_degenerate_region():
    report = validate_geometry(line_geometry(region=(5.0, 5.0), validate=False))
    assert "geometry.region_max" in report.keys


def test_planar_geometry_dead_zone():
    g = NetworkGeometry(
        source=(0.0, 0.0),
        dest=(12.0, 0.0),
        region_min=(0.5, -5.0),
        region_max=(11.0, 5.0),
        dimension=2,
        validate=False,
    )
    assert "geometry.region_min" in validate_geometry(g).keys


# ============================================================================
# Sampling
# ============================================================================

def test_sample_positions_shapes(geometry):
    stream = np.random.default_rng(1)
    assert sample_positions(geometry, 0, stream).shape == (0,)
    positions = sample_positions(geometry, 500, stream)
    assert positions.shape == (500,)
    assert positions.min() >= 1.0 and positions.max() <= 11.0

    planar = NetworkGeometry(
        source=(0.0, 0.0), dest=(12.0, 0.0), region_min=(1.0, -5.0), region_max=(11.0, 5.0), dimension=2
    )
    assert sample_positions(planar, 7, stream).shape == (7, 2)


def test_sample_positions_negative_count(geometry):
    with pytest.raises(ValueError):
        sample_positions(geometry, -1, np.random.default_rng(0))


def test_sample_mean_position(geometry):
    positions = sample_positions(geometry, 200_000, np.random.default_rng(7))
    # Uniform on [1, 11]: mean 6, standard deviation 10 / sqrt(12)
    se = 10.0 / np.sqrt(12.0) / np.sqrt(positions.size)
    assert abs(positions.mean() - 6.0) < 4 * se


# ============================================================================
# Expectations
# ============================================================================

def test_moments_match_closed_forms(moments):
    assert moments.e_rho_d == pytest.approx(E_RHO_D, rel=1e-8)
    assert moments.e_rho_s == pytest.approx(E_RHO_D, rel=1e-8)
    assert moments.e_ratio == pytest.approx(E_RATIO, rel=1e-8)
    assert moments.e_product == pytest.approx(E_PRODUCT, rel=1e-8)
    assert moments.min_rho_s == pytest.approx(1.0 / 121.0)


@pytest.mark.parametrize("dimension", [1, 2])
def test_moments_within_gain_bounds(dimension):
    if dimension == 1:
        g = line_geometry()
    else:
        g = NetworkGeometry(
            source=(0.0, 0.0), dest=(12.0, 0.0), region_min=(1.0, -5.0), region_max=(11.0, 5.0), dimension=2
        )
    m = compute_moments(g)
    for value in (m.e_rho_d, m.e_rho_s, m.e_ratio, m.e_product):
        assert 0.0 < value < math.inf
    assert m.e_rho_d <= g.max_gain and m.e_rho_s <= g.max_gain
    assert m.e_product <= m.e_rho_s * g.max_gain
    assert m.e_product <= m.e_rho_d * g.max_gain
    assert m.e_ratio <= g.max_gain / m.min_rho_s


def test_moments_are_memoized(geometry):
    assert compute_moments(geometry) is compute_moments(line_geometry())


def test_expect_constant_is_one(geometry):
    assert expect(geometry, lambda rs, rd: np.ones_like(rs)) == pytest.approx(1.0, rel=1e-12)


def test_expect_is_linear(geometry):
    f = lambda rs, rd: rd / rs
    h = lambda rs, rd: rs * rd
    combined = expect(geometry, lambda rs, rd: 2.0 * f(rs, rd) - 3.0 * h(rs, rd))
    assert combined == pytest.approx(2.0 * expect(geometry, f) - 3.0 * expect(geometry, h), rel=1e-9)


def test_expect_sub_interval(geometry):
    left = expect(geometry, lambda rs, rd: np.ones_like(rs), bounds=(1.0, 6.0))
    assert left == pytest.approx(0.5, rel=1e-12)


def test_expect_matches_sample_mean(geometry):
    positions = sample_positions(geometry, 200_000, np.random.default_rng(11))
    values = geometry.rho_d(positions) / geometry.rho_s(positions)
    se = values.std() / np.sqrt(values.size)
    assert abs(values.mean() - E_RATIO) < 4 * se


def test_planar_density_normalized():
    planar = NetworkGeometry(
        source=(0.0, 0.0), dest=(12.0, 0.0), region_min=(1.0, -5.0), region_max=(11.0, 5.0), dimension=2
    )
    assert expect(planar, lambda rs, rd: np.ones_like(rs)) == pytest.approx(1.0, rel=1e-9)
    # Planar gains are weaker than on the line through source and destination
    assert compute_moments(planar).e_rho_d < E_RHO_D
