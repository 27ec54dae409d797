"""Tests for the adaptive Gauss-Legendre integrator."""

import math

import numpy as np
import pytest

from src.errors import NumericError, QuadratureError
from src.quadrature import integrate, integrate_box


def test_polynomial_is_exact():
    assert integrate(lambda x: x ** 3 - 2.0 * x, 0.0, 2.0) == pytest.approx(0.0, abs=1e-12)
    assert integrate(lambda x: x ** 2, 0.0, 3.0) == pytest.approx(9.0, rel=1e-12)


def test_smooth_integrand():
    assert integrate(np.exp, 0.0, 1.0) == pytest.approx(math.e - 1.0, rel=1e-10)
    assert integrate(lambda x: 1.0 / x ** 2, 1.0, 11.0) == pytest.approx(10.0 / 11.0, rel=1e-10)


def test_empty_and_reversed_intervals():
    assert integrate(np.exp, 2.0, 2.0) == 0.0
    assert integrate(np.exp, 1.0, 0.0) == pytest.approx(-(math.e - 1.0), rel=1e-10)


def test_endpoint_kink_converges_with_depth():
    assert integrate(lambda x: x ** 1.5, 0.0, 1.0) == pytest.approx(0.4, rel=1e-8)


def test_depth_limit_raises_with_achieved_tolerance():
    with pytest.raises(QuadratureError) as info:
        integrate(np.sqrt, 0.0, 1.0, max_depth=1)
    assert isinstance(info.value, NumericError)
    assert info.value.achieved_tolerance > 0


def test_non_finite_integrand_rejected():
    with pytest.raises(ValueError):
        integrate(lambda x: np.full_like(x, np.nan), 0.0, 1.0)


def test_box_integral():
    value = integrate_box(lambda x, y: x * y, (0.0, 0.0), (1.0, 2.0))
    assert value == pytest.approx(1.0, rel=1e-10)
