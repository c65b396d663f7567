import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from besselwave.grid import RadialFunction, SpaceTimeField, TimeGrid, build_grid, norm_lr
from besselwave.grid import TestFunction as Family
from besselwave.hankel import (
    build_hankel,
    eigen_defect,
    fourier_hankel,
    inversion_defect,
    plancherel_defect,
    transform,
    verify_weber_schafheitlin,
    weber_schafheitlin_rhs,
)
from besselwave.specfun import bessel_j

NUS = [-0.5, 0.0, 0.5, 1.5]


@pytest.fixture(scope="module")
def ops():
    return {nu: build_hankel(nu, build_grid(2 * nu + 1, 12.0, 40, 20)) for nu in NUS}


@pytest.mark.parametrize("nu", NUS)
def test_gaussian_fixed_point(ops, nu):
    op = ops[nu]
    f = Family.gaussian(1.0).on(op.in_grid)
    assert np.max(np.abs(transform(op, f).values - f.values)) < 1e-10


@pytest.mark.parametrize("nu", NUS)
def test_scaled_gaussian_matches_closed_form(ops, nu):
    op = ops[nu]
    tf = Family.gaussian(0.6)
    out = transform(op, tf.on(op.in_grid)).values
    assert np.max(np.abs(out - tf.hankel_transform(nu, op.xi))) < 1e-10


@pytest.mark.parametrize("nu", NUS)
def test_unitarity_and_involution(ops, nu):
    op = ops[nu]
    for tf in (Family.gaussian(0.8), Family.gaussian_poly((1.0, 0.5, 0.1), 1.0), Family.hankel_bandlimited(nu)):
        f = tf.on(op.in_grid)
        assert plancherel_defect(op, f) < 1e-8
        assert inversion_defect(op, f) < 1e-7


@pytest.mark.parametrize("nu", NUS)
def test_eigenrelation(ops, nu):
    op = ops[nu]
    tf = Family.gaussian_poly((1.0, 0.3), 1.0)
    g = op.in_grid
    f = tf.on(g)
    analytic = eigen_defect(op, f, RadialFunction(g, tf.d2(g.nodes)), RadialFunction(g, tf.d1(g.nodes)))
    assert analytic < 1e-9
    assert eigen_defect(op, f, func=tf) < 1e-4


def test_matrix_is_symmetric_after_removing_weights(ops):
    op = ops[0.5]
    k = op.matrix / op.in_grid.qweights
    assert np.allclose(k, k.T, rtol=0, atol=1e-15)


def test_order_mismatch_rejected():
    with pytest.raises(ValueError):
        build_hankel(0.0, build_grid(2.0, 5.0, 4, 8))
    with pytest.raises(ValueError):
        build_hankel(-1.0, build_grid(-1.0 + 1e-9, 5.0, 4, 8))


def test_zero_function_plancherel_undefined(ops):
    op = ops[0.0]
    with pytest.raises(ValueError):
        plancherel_defect(op, RadialFunction(op.in_grid, np.zeros(op.in_grid.size)))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.4, 2.0), st.floats(-1.0, 1.0), st.sampled_from(NUS))
def test_transform_is_linear_and_norm_preserving(sigma, c, nu):
    g = build_grid(2 * nu + 1, 14.0, 40, 20)
    op = build_hankel(nu, g)
    f = Family.gaussian(sigma).on(g)
    h = Family.gaussian_poly((0.0, 1.0), 1.0).on(g)
    comb = RadialFunction(g, f.values + c * h.values)
    assert np.allclose(transform(op, comb).values, transform(op, f).values + c * transform(op, h).values, atol=1e-13)
    assert norm_lr(transform(op, comb), 2) == pytest.approx(norm_lr(comb, 2), rel=1e-8)


@pytest.mark.parametrize("kind", ["sin", "cos"])
def test_weber_closed_form_against_scipy(kind):
    nu, x, y, t = 0.3, 1.1, 0.7, 0.8
    trig = np.sin if kind == "sin" else np.cos
    # Damped quadrature with scipy's Bessel functions, extrapolated to zero damping.
    eps_set = np.array([0.04, 0.02, 0.01, 0.005])
    vals = []
    for eps in eps_set:
        f = lambda z: z * trig(t * z * z) * special.jv(nu, y * z) * special.jv(nu, x * z) * np.exp(-eps * z * z)
        zmax = math.sqrt(40 / eps)
        vals.append(integrate.quad(f, 0, zmax, limit=5000, epsabs=1e-12, epsrel=1e-12)[0])
    ref = np.polyval(np.polyfit(eps_set, vals, 3), 0.0)
    assert weber_schafheitlin_rhs(nu, x, y, t, kind) == pytest.approx(ref, abs=1e-5)


@pytest.mark.parametrize("nu,kind", [(0.0, "sin"), (1.2, "cos"), (-0.4, "cos"), (-0.8, "sin"), (-1.5, "sin")])
def test_damped_quadrature_matches_closed_form(nu, kind):
    chk = verify_weber_schafheitlin(nu, 1.3, 0.6, 0.9, kind=kind)
    assert chk.converged
    assert abs(chk.lhs - chk.rhs) < 1e-5


def test_weber_order_ranges():
    with pytest.raises(ValueError):
        verify_weber_schafheitlin(-1.5, 1.0, 1.0, 1.0, kind="cos")
    with pytest.raises(ValueError):
        verify_weber_schafheitlin(0.0, 1.0, 1.0, -1.0)


def test_fourier_hankel_against_direct_sum(ops):
    op = ops[0.0]
    g = op.in_grid
    times = TimeGrid.uniform(-1.0, 1.0, 21)
    F = SpaceTimeField(g, times, np.outer(np.cos(times.nodes), np.exp(-g.nodes**2)))
    targets = [(op.xi[5], 0.3), (0.77, -1.2)]
    got = fourier_hankel(F, 0.0, targets, op)
    for (xi, tau), val in zip(targets, got):
        hat = [np.sum(F.values[k] * g.qweights * bessel_j(0.0, xi * g.nodes)) for k in range(times.size)]
        ref = np.sum(times.qweights * np.exp(-2j * math.pi * tau * times.nodes) * np.array(hat))
        assert val == pytest.approx(ref, rel=1e-12)
