import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besselwave.specfun import (
    bessel_g,
    bessel_j,
    bessel_jp,
    bessel_y,
    bessel_yp,
    gamma,
    hankel_h,
    rgamma,
    z_switch,
)

mp.mp.dps = 30

orders = st.floats(min_value=-0.95, max_value=6.0).filter(lambda v: not float(v).is_integer() or v >= 0)
fractional_orders = st.floats(min_value=-0.95, max_value=6.0).filter(lambda v: abs(v - round(v)) > 1e-3)
args = st.floats(min_value=1e-3, max_value=60.0)


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.5, 7.3, 20.0, -0.3, -1.7])
def test_gamma_matches_mpmath(x):
    assert gamma(x) == pytest.approx(float(mp.gamma(x)), rel=1e-13)
    assert rgamma(x) == pytest.approx(float(mp.rgamma(x)), rel=1e-13)


def test_rgamma_vanishes_at_poles():
    assert rgamma(0.0) == 0.0
    assert rgamma(-3.0) == 0.0
    with pytest.raises(ValueError):
        gamma(-2.0)


@pytest.mark.parametrize("nu", [-7.3, -4.5, -0.7, -0.5, 0.0, 0.3, 1.0, 2.5, 7.0, 15.5])
@pytest.mark.parametrize("z", [1e-6, 0.01, 0.9, 5.0, 11.9, 12.1, 30.0, 80.0])
def test_bessel_j_matches_mpmath(nu, z):
    ref = float(mp.besselj(nu, z))
    scale = max(abs(ref), 1e-3 * min(1.0, z**nu) if nu > 0 else 1e-3)
    assert abs(bessel_j(nu, z) - ref) <= 1e-12 * max(1.0, 1.0 / scale) * scale + 1e-14


@pytest.mark.parametrize("nu", [-0.3, 0.5, 1.2, 3.5])
@pytest.mark.parametrize("z", [0.2, 3.0, 15.0, 45.0])
def test_derivatives_and_second_kind_match_mpmath(nu, z):
    assert bessel_jp(nu, z) == pytest.approx(float(mp.besselj(nu, z, derivative=1)), abs=1e-11)
    assert bessel_y(nu, z) == pytest.approx(float(mp.bessely(nu, z)), rel=1e-10, abs=1e-12)
    assert bessel_yp(nu, z) == pytest.approx(float(mp.bessely(nu, z, derivative=1)), rel=1e-9, abs=1e-11)


def test_hankel_functions_combine_both_kinds():
    z = np.array([0.5, 4.0, 25.0])
    h1, h2 = hankel_h(1, 0.7, z), hankel_h(2, 0.7, z)
    assert np.allclose(h1, bessel_j(0.7, z) + 1j * bessel_y(0.7, z), rtol=1e-14)
    assert np.allclose(h2, np.conj(h1), rtol=1e-14)


@pytest.mark.parametrize("nu", [-0.5, 0.0, 0.5, 1.5, 4.0])
def test_regularised_kernel_at_origin(nu):
    assert bessel_g(nu, 0.0) == pytest.approx(1.0 / (2.0**nu * math.gamma(nu + 1.0)), rel=1e-14)
    assert bessel_g(nu, 1e-9) == pytest.approx(bessel_g(nu, 0.0), rel=1e-12)


def test_half_order_closed_forms():
    z = np.linspace(0.01, 50.0, 2001)
    assert np.max(np.abs(bessel_j(0.5, z) - np.sqrt(2 / (np.pi * z)) * np.sin(z))) < 1e-12
    assert np.max(np.abs(bessel_j(-0.5, z) - np.sqrt(2 / (np.pi * z)) * np.cos(z))) < 1e-12


def test_switch_point_is_continuous():
    for nu in (0.0, 0.7, 3.2):
        z0 = z_switch(nu)
        left, right = bessel_j(nu, np.nextafter(z0, 0.0)), bessel_j(nu, np.nextafter(z0, 99.0))
        # each branch is good to about 1e-12 here
        assert abs(left - right) < 5e-12


@settings(max_examples=60, deadline=None)
@given(orders, args)
def test_three_term_recurrence(nu, z):
    lhs = bessel_j(nu - 1, z) + bessel_j(nu + 1, z)
    rhs = 2 * nu / z * bessel_j(nu, z)
    scale = max(abs(bessel_j(nu - 1, z)), abs(bessel_j(nu + 1, z)), 1e-300)
    assert abs(lhs - rhs) <= 1e-10 * scale


@settings(max_examples=60, deadline=None)
@given(fractional_orders, args)
def test_wronskian(nu, z):
    w = bessel_j(nu + 1, z) * bessel_y(nu, z) - bessel_j(nu, z) * bessel_y(nu + 1, z)
    assert w == pytest.approx(2 / (np.pi * z), rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(orders, args)
def test_regularised_kernel_consistent_with_j(nu, z):
    assert bessel_g(nu, z) * z**nu == pytest.approx(bessel_j(nu, z), rel=1e-12, abs=1e-300)


def test_vectorised_shapes():
    z = np.linspace(0.0, 40.0, 12).reshape(3, 4)
    assert bessel_g(1.0, z).shape == (3, 4)
    assert np.isscalar(bessel_j(0.0, 1.0)) or np.ndim(bessel_j(0.0, 1.0)) == 0
