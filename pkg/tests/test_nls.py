import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besselwave import nls
from besselwave.grid import RadialFunction, TimeGrid, build_grid, norm_lr
from besselwave.grid import TestFunction as Family
from besselwave.propagator import PropagatorSpec, apply_propagator


@pytest.fixture(scope="module")
def grid():
    return build_grid(1.0, 20.0, 40, 20)


def datum(grid, amplitude, sigma=1.0):
    f = Family.gaussian(sigma).on(grid)
    return RadialFunction(grid, f.values * amplitude / norm_lr(f, 2))


@pytest.mark.parametrize(
    "a,p,expected",
    [(1, 3, "critical"), (0, 5, "critical"), (1, 2, "subcritical"), (1, 4, "supercritical"), (Fraction(1, 3), 4, "critical")],
)
def test_classify(a, p, expected):
    assert nls.classify(a, p) == expected


def test_classify_float_tolerance():
    assert nls.classify(0.5, 1 + 4 / 1.5) == "critical"
    with pytest.raises(ValueError):
        nls.classify(-1, 3)


def test_zero_datum_gives_zero(grid):
    prob = nls.NLSProblem(1.0, 1j, 3.0, RadialFunction(grid, np.zeros(grid.size, dtype=complex)), 0.5)
    rep = nls.picard_solve(prob)
    assert rep.iterations == 1 and not np.any(rep.solution.values)


def test_linear_problem_is_linear_flow(grid):
    phi = datum(grid, 0.5)
    prob = nls.NLSProblem(1.0, 0.0, 3.0, phi, 0.5)
    rep = nls.picard_solve(prob)
    assert rep.contraction_factors[0] == 0.0
    spec = PropagatorSpec.on_grid(grid)
    last = apply_propagator(spec, 0.5, phi).values
    assert np.max(np.abs(rep.solution.values[-1] - last)) < 1e-12


def test_picard_small_data(grid):
    prob = nls.NLSProblem(1.0, 1j, 3.0, datum(grid, 0.05), 1.0)
    rep = nls.picard_solve(prob)
    assert rep.converged and not rep.diverged
    assert rep.observed_contraction <= 0.5
    assert rep.fixed_point_residual <= 2e-10
    m = np.asarray(rep.mass_trace)
    assert np.max(np.abs(m / m[0] - 1)) <= 1e-4
    assert all(np.isfinite(rep.contraction_factors))


def test_picard_refuses_supercritical(grid):
    prob = nls.NLSProblem(1.0, 1j, 5.0, datum(grid, 0.05), 0.2)
    with pytest.raises(ValueError):
        nls.picard_solve(prob)


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
def test_picard_flags_divergence(grid):
    prob = nls.NLSProblem(1.0, -20.0, 3.0, datum(grid, 5.0), 1.0)
    rep = nls.picard_solve(prob, max_iter=20)
    assert rep.diverged and not rep.converged


def test_stepper_nonlinear_substep_preserves_modulus(grid):
    prob = nls.NLSProblem(1.0, 1j, 3.0, datum(grid, 0.05), 0.1)
    rep = nls.step_solve(prob, 1e-2)
    m = np.asarray(rep.mass_trace)
    assert np.max(np.abs(m / m[0] - 1)) < 1e-10


def test_stepper_second_order(grid):
    prob = nls.NLSProblem(1.0, 1j, 3.0, datum(grid, 1.0), 0.4)
    coarse, mid, fine = (nls.step_solve(prob, dt).solution.values[-1] for dt in (4e-3, 2e-3, 1e-3))
    order = math.log2(np.linalg.norm(coarse - mid) / np.linalg.norm(mid - fine))
    assert order == pytest.approx(2.0, abs=0.15)


def test_real_mu_drift_is_nonzero(grid):
    prob = nls.NLSProblem(1.0, 1.0, 3.0, datum(grid, 1.0), 0.3)
    m = np.asarray(nls.step_solve(prob, 1e-3).mass_trace)
    assert np.max(np.abs(m / m[0] - 1)) > 1e-6


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10.0))
def test_critical_rescaling_preserves_norm(lam):
    g = build_grid(1.0, 10.0, 20, 16)
    phi = datum(g, 0.05)
    assert norm_lr(nls.rescale_datum(phi, lam, 3.0), 2) == pytest.approx(norm_lr(phi, 2), rel=1e-12)


def test_subcritical_rescaling_exponent(grid):
    phi = datum(grid, 0.05)
    # lambda^(-2/(p-1) + (a+1)/2) = 2^(-2 + 1) = 1/2
    assert norm_lr(nls.rescale_datum(phi, 2.0, 2.0), 2) == pytest.approx(0.5 * norm_lr(phi, 2), rel=1e-12)


def test_scaling_commutation(grid):
    prob = nls.NLSProblem(1.0, 1j, 3.0, datum(grid, 0.05), 0.25)
    assert nls.scaling_commutation(prob, 1.0, n_times=101) == pytest.approx(0.0, abs=1e-12)
    assert nls.scaling_commutation(prob, 2.0, n_times=101) <= 0.01
    with pytest.raises(ValueError):
        nls.scaling_commutation(prob, 4.0, max_horizon=1.0)


def test_small_data_budget(grid):
    direction = Family.gaussian(1.0).on(grid)
    assert nls.small_data_budget(1.0, 3.0, 0.0, direction).value == math.inf
    b = nls.small_data_budget(1.0, 3.0, 1j, direction, T=2.0, n_times=201, hi=4.0, rel_tol=0.1)
    assert b.value > 0 and b.label == "empirical"


def test_globalize_requires_subcritical(grid):
    with pytest.raises(ValueError):
        nls.globalize(nls.NLSProblem(1.0, 1j, 3.0, datum(grid, 0.05), 2.0), 1.0)


def test_globalize_hands_off_mass():
    g = build_grid(1.0, 40.0, 60, 20)
    prob = nls.NLSProblem(1.0, 1j, 2.0, datum(g, 0.3, sigma=3.0), 2.0)
    rep = nls.globalize(prob, 1.0, nodes_per_chunk=101)
    assert rep.handoff_times == (0.0, 1.0, 2.0)
    assert rep.max_mass_gap <= 1e-6
    assert rep.solution.times.nodes[-1] == pytest.approx(2.0)


def test_solution_map_lipschitz(grid):
    phi = datum(grid, 0.05)
    prob = nls.NLSProblem(1.0, 1j, 3.0, phi, 0.5)
    rng = np.random.default_rng(3)
    deltas = [0.005 * rng.normal() * np.exp(-grid.nodes**2 / s) for s in (0.5, 1.0, 2.0, 3.0, 4.0)]
    ks = nls.solution_map_lipschitz(prob, deltas, times=TimeGrid.uniform(0.0, 0.5, 101))
    assert len(ks) == 5 and all(np.isfinite(ks)) and max(ks) < 2.0
