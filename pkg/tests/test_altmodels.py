import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besselwave import altmodels as alt
from besselwave.grid import build_grid
from besselwave.grid import TestFunction as Family


@pytest.mark.parametrize("a", [-0.5, 0.0, 1.0, 2.5])
def test_image_grid_carries_the_gamma_moment(a):
    km = alt.KimuraMap(a)
    img = km.image_grid(build_grid(a, 14.0, 40, 20))
    # int_0^inf y^(b-1) exp(-y) dy = Gamma(b)
    assert img.qweights @ np.exp(-img.nodes) == pytest.approx(math.gamma(km.b), rel=1e-12)
    assert img.a == pytest.approx(km.b - 1)


def test_transfer_keeps_samples():
    g = build_grid(1.0, 8.0, 10, 12)
    u = Family.gaussian(1.0).on(g)
    v = alt.kimura_transfer(alt.KimuraMap(1.0), u)
    assert np.array_equal(v.values, u.values)
    assert np.allclose(v.grid.nodes, g.nodes**2 / 4)


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.9, 4.0), st.floats(0.5, 3.0))
def test_flux_identity(a, s):
    km = alt.KimuraMap(a)
    x = np.linspace(0.05, 5.0, 40)
    du = lambda x: -x / s**2 * np.exp(-x * x / (2 * s * s))
    dv = lambda y: -2 / s**2 * np.exp(-2 * y / s**2)
    assert alt.kimura_flux_residual(km, du, dv, x) < 1e-12


@pytest.mark.parametrize("a", [-0.5, 0.0, 1.0, 2.5])
def test_operator_intertwining(a):
    km = alt.KimuraMap(a)
    x = np.linspace(0.1, 5.0, 50)
    assert alt.kimura_operator_residual(km, lambda z: np.exp(-z * z / 2), x) < 1e-6


def test_operator_residual_rejects_origin():
    with pytest.raises(ValueError):
        alt.kimura_operator_residual(alt.KimuraMap(0.0), np.cos, np.array([0.0, 1.0]))


@pytest.mark.parametrize("ell", [-0.45, -0.2, 0.1, 0.3])
def test_closed_form_against_mpmath(ell):
    x, y, t = 0.8, 1.9, 0.6
    mp.mp.dps = 25
    ref = (
        mp.exp(0.5j * mp.pi * (ell - 0.5))
        / (2 * t)
        * mp.sqrt(x * y)
        * mp.besselj(-ell - 0.5, x * y / (2 * t))
        * mp.exp(1j * (x * x + y * y) / (4 * t))
    )
    assert complex(alt.inverse_square_closed_form(ell, x, y, t)) == pytest.approx(complex(ref), rel=1e-12)
    assert complex(alt.inverse_square_closed_form(ell, x, y, -t)) == pytest.approx(complex(ref).conjugate(), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.95, 0.95), st.floats(0.05, 6.0), st.floats(0.05, 6.0), st.floats(0.1, 3.0), st.booleans())
def test_kernel_bridge(a, x, y, t, negative):
    spec = alt.InverseSquareSpec(a)
    assert alt.kernel_bridge_defect(spec, x, y, -t if negative else t) < 1e-10


def test_closed_form_range():
    assert not alt.InverseSquareSpec(1.5).has_closed_form
    with pytest.raises(ValueError):
        alt.inverse_square_closed_form(0.5, 1.0, 1.0, 1.0)
    assert alt.InverseSquareSpec.from_ell(0.25).a == pytest.approx(-0.5)


@pytest.mark.parametrize("a", [-0.9, -0.5, 0.5, 1.5])
def test_hardy_identity_and_norm(a):
    v = lambda x: x ** (a / 2) * np.exp(-x * x / 2)
    c = (a / 2) * (a / 2 - 1)

    def v_xx(x):
        # (x^m e^{-x^2/2})'' with m = a/2
        m = a / 2
        return (m * (m - 1) * x ** (m - 2) - (2 * m + 1) * x**m + x ** (m + 2)) * np.exp(-x * x / 2)

    x = np.linspace(0.2, 5.0, 40)
    assert alt.hardy_map_residual(a, v, x, v_xx=v_xx) < 1e-6
    assert alt.hardy_map_residual(a, v, x) < 1e-3
    assert alt.hardy_norm_defect(a, v) < 1e-10
    assert c == pytest.approx(-alt.InverseSquareSpec(a).ell * (-alt.InverseSquareSpec(a).ell - 1))


def test_inverse_square_ratios_bounded():
    ell = 0.25
    g = build_grid(-2 * ell, 12.0, 60, 24)
    ratios = alt.inverse_square_dispersive_check(ell, Family.gaussian(1.0).on(g), np.geomspace(0.01, 100.0, 9))
    assert all(np.isfinite(ratios)) and max(ratios) <= 1.0
    with pytest.raises(ValueError):
        alt.inverse_square_dispersive_check(-0.25, Family.gaussian(1.0).on(build_grid(0.5, 12.0, 20, 16)), [1.0])


def test_inverse_square_decay_slope():
    ell = -0.25
    g = build_grid(-2 * ell, 1.2, 40, 24)
    fit = alt.inverse_square_decay_fit(ell, Family.gaussian(0.1).on(g), np.geomspace(1.0, 100.0, 7))
    assert fit.slope == pytest.approx(-0.5, rel=0.03)


def test_hardy_evolve_at_time_zero_is_identity():
    spec = alt.InverseSquareSpec(0.5)
    g = build_grid(0.5, 12.0, 20, 16)
    phi = Family.gaussian(1.0).on(g)
    x = g.nodes[:5]
    assert np.allclose(alt.hardy_evolve(spec, phi, 0.0, x), x**0.25 * phi.values[:5])
