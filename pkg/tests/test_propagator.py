import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besselwave.grid import RadialFunction, SpaceTimeField, TimeGrid, build_grid, norm_lr
from besselwave.grid import TestFunction as Family
from besselwave.hankel import build_hankel
from besselwave.propagator import (
    BoundaryData,
    PropagatorSpec,
    apply_propagator,
    boundary_flux,
    duhamel,
    eigenfunction_residual,
    inhomogeneous_bc_solve,
    kernel_apply,
    kernel_eval,
    mass_integral,
    mass_integral_closed_form,
    spectral_evolve,
)


@pytest.fixture(scope="module")
def wide():
    # Wide enough that a sigma = 3 Gaussian stays inside up to |t| = 5.
    return {a: build_grid(a, 40.0, 60, 20) for a in (-0.5, 0.0, 1.0)}


def free_line_kernel(x, y, t):
    """Even extension of the heat-type kernel of exp(i t d_xx) on the line."""
    k = lambda d: np.exp(1j * d * d / (4 * t)) / np.sqrt(4j * math.pi * t)
    return k(x - y) + k(x + y)


def test_kernel_reduces_to_free_line_at_a0():
    x = np.array([0.1, 0.9, 2.3])[:, None]
    y = np.array([0.05, 1.7, 3.1])[None, :]
    for t in (0.3, 1.0, 2.5):
        assert np.allclose(kernel_eval(0.0, x, y, t), free_line_kernel(x, y, t), rtol=1e-12, atol=0)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(-0.9, 3.0),
    st.floats(0.05, 5.0),
    st.floats(0.05, 5.0),
    st.floats(0.1, 4.0),
    st.floats(0.3, 3.0),
)
def test_kernel_symmetries(a, x, y, t, lam):
    k = kernel_eval(a, x, y, t)
    assert kernel_eval(a, y, x, t) == pytest.approx(k, rel=1e-13)
    assert kernel_eval(a, x, y, -t) == pytest.approx(np.conj(k), rel=1e-13)
    scaled = kernel_eval(a, lam * x, lam * y, lam * lam * t)
    assert scaled * lam ** (a + 1) == pytest.approx(k, rel=1e-11)


@pytest.mark.parametrize("a", [-0.5, 0.0, 1.0])
@pytest.mark.parametrize("t", [-5.0, -1.0, 0.1, 1.0, 5.0])
def test_unitarity(wide, a, t):
    g = wide[a]
    phi = Family.gaussian(3.0).on(g)
    out = apply_propagator(PropagatorSpec.on_grid(g), t, phi)
    assert norm_lr(out, 2) == pytest.approx(norm_lr(phi, 2), rel=1e-9)


@pytest.mark.parametrize("a", [-0.5, 1.0])
def test_group_law(wide, a):
    g = wide[a]
    spec = PropagatorSpec.on_grid(g)
    phi = Family.gaussian_poly((1.0, 0.05), 3.0).on(g)
    two_steps = apply_propagator(spec, 0.7, apply_propagator(spec, 1.3, phi))
    once = apply_propagator(spec, 2.0, phi)
    assert np.max(np.abs(two_steps.values - once.values)) < 1e-10
    back = apply_propagator(spec, -2.0, once)
    assert np.max(np.abs(back.values - phi.values)) < 1e-10


def test_time_zero_is_identity(wide):
    g = wide[0.0]
    phi = Family.gaussian(1.0).on(g)
    assert np.array_equal(apply_propagator(PropagatorSpec.on_grid(g), 0.0, phi).values, phi.values)


def test_gaussian_evolves_in_closed_form():
    # S(t) exp(-x^2/2) through its transform: H f = exp(-xi^2/2), so
    # S(t) f = H[exp(-(1/2 + i t) xi^2)] = (1 + 2 i t)^-(nu+1) exp(-x^2 / (2 (1 + 2 i t))).
    a = 1.0
    nu = 0.5 * (a - 1)
    g = build_grid(a, 14.0, 40, 20)
    phi = Family.gaussian(1.0).on(g)
    for t in (0.25, 1.0):
        c = 1 + 2j * t
        exact = c ** -(nu + 1) * np.exp(-g.nodes**2 / (2 * c))
        assert np.max(np.abs(apply_propagator(PropagatorSpec.on_grid(g), t, phi).values - exact)) < 1e-11


@pytest.mark.parametrize("a", [0.0, 1.0, 2.0])
def test_kernel_route_matches_spectral(a):
    g = build_grid(a, 12.0, 60, 20)
    phi = Family.gaussian(1.0).on(g)
    op = build_hankel(g.nu, g)
    x = g.nodes[g.nodes < 4.0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        vals, _ = kernel_apply(a, 1.0, phi, x_out=x)
    spec = spectral_evolve(op, 1.0, phi.values)[: x.size]
    assert np.max(np.abs(vals - spec)) < 1e-6


@pytest.mark.parametrize("a", [-0.5, 0.0, 1.0, 1.5])
@pytest.mark.parametrize("x,t", [(1.0, 1.0), (0.0, 0.5), (2.0, -1.0)])
def test_mass_identity(a, x, t):
    res = mass_integral(a, x, t)
    assert abs(res.value - 1.0) < 1e-3
    # the damped closed form tends to 1 as the damping vanishes
    assert abs(mass_integral_closed_form(a, x, t, 0.0) - 1.0) < 1e-12


def test_duhamel_constant_source():
    a = 1.0
    g = build_grid(a, 14.0, 40, 20)
    spec = PropagatorSpec.on_grid(g)
    phi = Family.gaussian(1.0).on(g)
    times = TimeGrid.uniform(0.0, 1.0, 801)
    F = SpaceTimeField(g, times, np.tile(phi.values, (times.size, 1)))
    got = duhamel(spec, F, 1.0).values
    op = spec.hankel_op
    xi2 = op.xi**2
    # int_0^t exp(-i (t - s) xi^2) ds = (1 - exp(-i t xi^2)) / (i xi^2)
    mult = np.where(xi2 > 0, (1 - np.exp(-1j * xi2)) / (1j * np.where(xi2 > 0, xi2, 1.0)), 1.0)
    exact = op.apply(mult * op.apply(phi.values))
    assert np.max(np.abs(got - exact)) < 1e-5


def test_duhamel_range_checked():
    g = build_grid(0.0, 8.0, 10, 12)
    F = SpaceTimeField(g, TimeGrid.uniform(0.0, 1.0, 5), np.zeros((5, g.size)))
    with pytest.raises(ValueError):
        duhamel(PropagatorSpec.on_grid(g), F, 2.0)


def test_boundary_flux_is_imposed():
    a = 0.5
    g = build_grid(a, 14.0, 40, 20)
    spec = PropagatorSpec.on_grid(g)
    times = np.linspace(0.0, 1.0, 801)
    bc = BoundaryData.from_callables(times, lambda t: t * np.exp(-t), lambda t: (1 - t) * np.exp(-t))
    zero = RadialFunction(g, np.zeros(g.size, dtype=complex))
    for t in (0.5, 1.0):
        sol = inhomogeneous_bc_solve(spec, None, bc, zero, t)
        target = t * math.exp(-t)
        # extrapolated from the three smallest nodes
        assert abs(boundary_flux(spec, sol) - target) <= 0.01 * target


def test_log_lift_unsupported():
    g = build_grid(1.0, 8.0, 10, 12)
    bc = BoundaryData.from_callables(np.linspace(0, 1, 5), lambda t: t, lambda t: np.ones_like(t))
    with pytest.raises(ValueError):
        inhomogeneous_bc_solve(PropagatorSpec.on_grid(g), None, bc, Family.gaussian().on(g), 0.5)


def test_boundary_datum_must_start_at_zero():
    with pytest.raises(ValueError):
        BoundaryData.from_callables(np.linspace(0, 1, 5), lambda t: 1 + t, lambda t: np.ones_like(t))


@pytest.mark.parametrize("a", [0.5, 2.0])
def test_generalised_eigenfunctions(a):
    residual, flux_regular, flux_singular = eigenfunction_residual(a, 2.0)
    assert residual < 1e-6
    assert flux_regular < 1e-3
    if a < 1:
        assert flux_singular > 0.1
