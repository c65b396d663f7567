import math

import numpy as np
import pytest

from besselwave.oscint import damped_integral, default_schedule, panel_integral, richardson_to_zero


def test_richardson_is_exact_on_polynomials():
    eps = default_schedule(0.1, 5)
    vals = [2.0 + 3.0 * e - 7.0 * e**2 + e**3 for e in eps]
    ext = richardson_to_zero(eps, vals)
    assert ext.value == pytest.approx(2.0, abs=1e-12)
    assert ext.converged


def test_panel_integral():
    assert panel_integral(np.sin, 0.0, math.pi, 4) == pytest.approx(2.0, abs=1e-14)


def test_fresnel_integral_by_damping():
    # int_0^inf sin(z^2) dz = sqrt(pi/8)
    eps = default_schedule(1e-2, 5)
    vals = [damped_integral(lambda z: np.sin(z * z), e, lambda Z: 2 * Z) for e in eps]
    ext = richardson_to_zero(eps, vals, tol=1e-8)
    assert ext.value == pytest.approx(math.sqrt(math.pi / 8), abs=1e-7)


def test_origin_power_singularity():
    # int_0^inf z^-1/2 exp(-z^2) dz = Gamma(1/4) / 2 with eps = 1 doing the damping
    val = damped_integral(lambda z: np.ones_like(z), 1.0, lambda Z: 1.0, origin_power=-0.5)
    assert val == pytest.approx(math.gamma(0.25) / 2, rel=1e-12)


def test_undamped_needs_cutoff():
    with pytest.raises(ValueError):
        damped_integral(np.cos, 0.0, lambda Z: 1.0)
