"""Nonlinear problem ``u_t - i B_a u = mu |u|^(p-1) u`` with ``u(., 0) = phi``.

Two independent solvers are provided.  :func:`picard_solve` iterates the
Duhamel map on the whole time window at once, measuring differences in a
finite set of admissible mixed norms.  :func:`step_solve` is a Strang
split-step integrator.  Agreement between the two is the main correctness
check; mass conservation for imaginary ``mu`` is the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

from .estimates import AdmissiblePair
from .grid import RadialFunction, RadialGrid, SpaceTimeField, TimeGrid, _lr, mixed_norm, norm_lr
from .hankel import HankelOperator, build_hankel
from .propagator import duhamel_hat

__all__ = [
    "NLSProblem",
    "SolveReport",
    "StepSizeError",
    "classify",
    "critical_p",
    "default_pairs",
    "x_norm",
    "picard_solve",
    "step_solve",
    "mass_trace",
    "rescale_datum",
    "scaling_commutation",
    "Budget",
    "small_data_budget",
    "GlobalReport",
    "globalize",
    "solution_map_lipschitz",
]

DEFAULT_DT = 0.005


class StepSizeError(RuntimeError):
    """A split step changed the mass by more than the allowed jump."""


def critical_p(a: float) -> float:
    return 1.0 + 4.0 / (a + 1.0)


def classify(a, p) -> str:
    """``'critical'``, ``'subcritical'`` or ``'supercritical'`` relative to ``p = 1 + 4/(a+1)``.

    Rational inputs (``int``, ``Fraction``) are compared exactly; floats up to
    a relative ``1e-12``.
    """
    if not a > -1:
        raise ValueError("a must exceed -1")
    if not p > 1:
        raise ValueError("p must exceed 1")
    if isinstance(a, Rational) and isinstance(p, Rational):
        pc = 1 + Fraction(4) / (Fraction(a) + 1)
        if Fraction(p) == pc:
            return "critical"
        return "subcritical" if Fraction(p) < pc else "supercritical"
    pc = critical_p(float(a))
    if math.isclose(float(p), pc, rel_tol=1e-12):
        return "critical"
    return "subcritical" if p < pc else "supercritical"


@dataclass(frozen=True, eq=False)
class NLSProblem:
    a: float
    mu: complex
    p: float
    phi: RadialFunction
    T: float

    def __post_init__(self):
        if not self.a > -1:
            raise ValueError("a must exceed -1")
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if not self.T > 0:
            raise ValueError("horizon T must be positive")
        if not math.isclose(self.phi.grid.a, self.a, abs_tol=1e-12):
            raise ValueError("datum grid weight does not match a")
        object.__setattr__(self, "mu", complex(self.mu))

    @property
    def regime(self) -> str:
        return classify(self.a, self.p)

    def with_datum(self, phi: RadialFunction, T: float | None = None) -> "NLSProblem":
        return NLSProblem(self.a, self.mu, self.p, phi, self.T if T is None else T)

    def nonlinearity(self, v: np.ndarray) -> np.ndarray:
        return self.mu * np.abs(v) ** (self.p - 1.0) * v


@dataclass(frozen=True, eq=False)
class SolveReport:
    solution: SpaceTimeField
    iterations: int
    contraction_factors: tuple[float, ...]
    mass_trace: tuple[float, ...]
    pair_norms: dict = field(default_factory=dict)
    converged: bool = True
    diverged: bool = False
    fixed_point_residual: float = math.nan

    @property
    def observed_contraction(self) -> float:
        """Largest factor after the first; the first only measures the nonlinear correction."""
        f = self.contraction_factors
        if not f:
            return math.nan
        return max(f[1:]) if len(f) > 1 else f[0]


def default_pairs(a: float, p: float) -> tuple[AdmissiblePair, ...]:
    """Diagonal pair, the pair with ``r = 4``, the pair with ``r = p r'`` and ``(p, 2p)`` where admissible."""
    diag = AdmissiblePair.diagonal(a)
    candidates = [diag.r, 4.0, p * diag.r_dual, 2.0 * p]
    out: list[AdmissiblePair] = []
    for r in candidates:
        try:
            pair = AdmissiblePair.from_r(a, r)
        except ValueError:
            continue
        if not any(math.isclose(pair.r, o.r, rel_tol=1e-12) for o in out):
            out.append(pair)
    return tuple(out)


def x_norm(u: SpaceTimeField, pairs: Sequence[AdmissiblePair]) -> float:
    """Maximum of the ``L^q_t L^r_a`` norms over ``pairs``."""
    return max(mixed_norm(u, pr.q, pr.r) for pr in pairs)


def _x_norm_values(values: np.ndarray, grid: RadialGrid, tw: np.ndarray, pairs) -> float:
    best = 0.0
    for pr in pairs:
        inner = _lr(values, grid.qweights, pr.r)
        best = max(best, float((tw @ inner**pr.q) ** (1.0 / pr.q)))
    return best


def mass_trace(u: SpaceTimeField) -> np.ndarray:
    """``||u(., t_k)||_{L^2_a}^2`` at every time node."""
    return np.abs(u.values) ** 2 @ u.grid.qweights


def _operator(prob: NLSProblem, op: HankelOperator | None) -> HankelOperator:
    if op is None:
        return build_hankel(prob.phi.grid.nu, prob.phi.grid)
    if not op.in_grid.same_as(prob.phi.grid):
        raise ValueError("Hankel operator does not act on the datum's grid")
    return op


def _check_solver(prob: NLSProblem, allow_supercritical: bool) -> None:
    if prob.a < 0:
        raise ValueError("the solvers need a >= 0")
    if prob.regime == "supercritical" and not allow_supercritical:
        raise ValueError("supercritical p is refused unless allow_supercritical=True")


def picard_solve(
    prob: NLSProblem,
    pairs: Sequence[AdmissiblePair] | None = None,
    tol: float = 1e-10,
    max_iter: int = 60,
    *,
    times: TimeGrid | None = None,
    op: HankelOperator | None = None,
    allow_supercritical: bool = False,
) -> SolveReport:
    """Fixed-point iteration ``v <- S_a(t) phi + mu int_0^t S_a(t-s) |v|^(p-1) v ds`` on ``[0, T]``.

    Starts from the linear flow.  Stops when ``||v_{k+1} - v_k||_X <
    tol ||v_k||_X``; flags divergence when the contraction factor exceeds 1
    three times in a row.
    """
    _check_solver(prob, allow_supercritical)
    op = _operator(prob, op)
    grid = prob.phi.grid
    if times is None:
        times = TimeGrid.uniform(0.0, prob.T, max(201, int(math.ceil(prob.T / DEFAULT_DT)) + 1))
    t = times.nodes
    if t[0] != 0.0 or not math.isclose(t[-1], prob.T, rel_tol=1e-12):
        raise ValueError("time grid must cover [0, T]")
    pairs = tuple(pairs) if pairs is not None else default_pairs(prob.a, prob.p)
    tw = times.qweights

    phase = np.exp(-1j * np.multiply.outer(t, op.xi**2))
    linear_hat = phase * op.apply(prob.phi.values)

    def Phi(v: np.ndarray) -> np.ndarray:
        if prob.mu == 0:
            return op.apply(linear_hat)
        nl_hat = op.apply(prob.nonlinearity(v))
        return op.apply(linear_hat + duhamel_hat(op, t, nl_hat))

    def X(vals):
        return _x_norm_values(vals, grid, tw, pairs)

    v = op.apply(linear_hat)
    factors: list[float] = []
    prev_step = X(v)
    converged = diverged = False
    it = 0
    if prev_step == 0.0:
        converged, it, factors = True, 1, [0.0]
    while not converged and it < max_iter:
        nxt = Phi(v)
        step = X(nxt - v)
        factors.append(step / prev_step if prev_step > 0 else 0.0)
        size = X(v)
        v = nxt
        it += 1
        if step <= tol * size:
            converged = True
            break
        prev_step = step
        if len(factors) >= 3 and all(f > 1.0 for f in factors[-3:]):
            diverged = True
            break
    sol = SpaceTimeField(grid, times, v)
    size = X(v)
    residual = X(Phi(v) - v) / size if size > 0 else 0.0
    return SolveReport(
        solution=sol,
        iterations=it,
        contraction_factors=tuple(factors),
        mass_trace=tuple(mass_trace(sol).tolist()),
        pair_norms={pr: mixed_norm(sol, pr.q, pr.r) for pr in pairs},
        converged=converged,
        diverged=diverged,
        fixed_point_residual=float(residual),
    )


def _nonlinear_flow(prob: NLSProblem, u: np.ndarray, h: float) -> np.ndarray:
    """Flow of ``u' = mu |u|^(p-1) u`` over time ``h``: exact if ``Re mu = 0``, else RK4."""
    if prob.mu == 0:
        return u
    if prob.mu.real == 0:
        return u * np.exp(prob.mu * np.abs(u) ** (prob.p - 1.0) * h)
    f = prob.nonlinearity
    k1 = f(u)
    k2 = f(u + 0.5 * h * k1)
    k3 = f(u + 0.5 * h * k2)
    k4 = f(u + h * k3)
    return u + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def step_solve(
    prob: NLSProblem,
    dt: float,
    *,
    op: HankelOperator | None = None,
    pairs: Sequence[AdmissiblePair] | None = None,
    max_mass_jump: float = 1e-8,
    allow_supercritical: bool = False,
) -> SolveReport:
    """Strang splitting: half nonlinear step, linear multiplier step, half nonlinear step.

    For imaginary ``mu`` a step that changes the mass by more than
    ``max_mass_jump`` (relative) raises :class:`StepSizeError`.
    """
    _check_solver(prob, allow_supercritical)
    if not dt > 0:
        raise ValueError("dt must be positive")
    op = _operator(prob, op)
    grid = prob.phi.grid
    n = max(1, int(round(prob.T / dt)))
    h = prob.T / n
    mult = np.exp(-1j * h * op.xi**2)
    w = grid.qweights
    out = np.empty((n + 1, grid.size), dtype=complex)
    u = prob.phi.values.copy()
    out[0] = u
    mass = float(np.abs(u) ** 2 @ w)
    for k in range(n):
        u = _nonlinear_flow(prob, u, 0.5 * h)
        u = op.apply(mult * op.apply(u))
        u = _nonlinear_flow(prob, u, 0.5 * h)
        out[k + 1] = u
        if prob.mu.real == 0 and mass > 0:
            new = float(np.abs(u) ** 2 @ w)
            if abs(new - mass) > max_mass_jump * mass:
                raise StepSizeError(f"mass jump {abs(new - mass) / mass:.2e} at step {k + 1}; reduce dt or refine the grid")
            mass = new
    times = TimeGrid(np.linspace(0.0, prob.T, n + 1))
    sol = SpaceTimeField(grid, times, out)
    pairs = tuple(pairs) if pairs is not None else default_pairs(prob.a, prob.p)
    return SolveReport(
        solution=sol,
        iterations=n,
        contraction_factors=(),
        mass_trace=tuple(mass_trace(sol).tolist()),
        pair_norms={pr: mixed_norm(sol, pr.q, pr.r) for pr in pairs},
    )


# --- scaling -----------------------------------------------------------------


def _scaled_grid(grid: RadialGrid, lam: float) -> RadialGrid:
    return RadialGrid(
        grid.a,
        grid.nodes * lam,
        grid.qweights * lam ** (grid.a + 1.0),
        grid.x_max * lam,
        grid.panels,
        grid.order,
        grid.refine,
    )


def rescale_datum(phi: RadialFunction, lam: float, p: float) -> RadialFunction:
    """``phi_lam(x) = lam^(-2/(p-1)) phi(x / lam)`` on the grid dilated by ``lam``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return RadialFunction(_scaled_grid(phi.grid, lam), lam ** (-2.0 / (p - 1.0)) * phi.values)


def scaling_commutation(
    prob: NLSProblem,
    lam: float,
    pairs: Sequence[AdmissiblePair] | None = None,
    *,
    max_horizon: float | None = None,
    n_times: int = 401,
    tol: float = 1e-10,
) -> float:
    """Largest relative gap, over the pair set, between ``||solve(phi_lam)||`` and the rescaled ``||solve(phi)||``.

    The rescaled problem is solved on ``[0, lam^2 T]`` on the dilated grid.
    Each admissible norm of ``u_lam`` equals ``lam^(-2/(p-1) + (a+1)/2)``
    times that of ``u``.
    """
    if max_horizon is not None and lam * lam * prob.T > max_horizon:
        raise ValueError(f"lambda^2 T = {lam * lam * prob.T:g} exceeds the solved horizon {max_horizon:g}")
    pairs = tuple(pairs) if pairs is not None else default_pairs(prob.a, prob.p)
    base = picard_solve(prob, pairs, tol, times=TimeGrid.uniform(0.0, prob.T, n_times))
    sprob = prob.with_datum(rescale_datum(prob.phi, lam, prob.p), lam * lam * prob.T)
    scaled = picard_solve(sprob, pairs, tol, times=TimeGrid.uniform(0.0, sprob.T, n_times))
    if not (base.converged and scaled.converged):
        raise RuntimeError("the solver did not converge at both scales")
    factor = lam ** (-2.0 / (prob.p - 1.0) + (prob.a + 1.0) / 2.0)
    gaps = [abs(scaled.pair_norms[pr] - factor * base.pair_norms[pr]) / (factor * base.pair_norms[pr]) for pr in pairs]
    return float(max(gaps))


# --- small data and globalisation ---------------------------------------------


@dataclass(frozen=True)
class Budget:
    """Empirical small-data threshold: the largest datum norm with observed contraction <= ``target``."""

    value: float
    target: float
    evaluations: int
    label: str = "empirical"


def small_data_budget(
    a: float,
    p: float,
    mu: complex,
    direction: RadialFunction,
    T: float = 10.0,
    pairs: Sequence[AdmissiblePair] | None = None,
    *,
    target: float = 0.5,
    n_times: int = 1001,
    lo: float = 1e-3,
    hi: float = 10.0,
    rel_tol: float = 0.02,
) -> Budget:
    """Bisect on the ``L^2_a`` norm of ``c * direction`` for the Picard contraction threshold.

    A norm passes when :func:`picard_solve` converges with observed
    contraction factor at most ``target``.  Returns ``inf`` for ``mu = 0``.
    """
    if complex(mu) == 0:
        return Budget(math.inf, target, 0)
    unit = direction.values / norm_lr(direction, 2)
    times = TimeGrid.uniform(0.0, T, n_times)
    op = build_hankel(direction.grid.nu, direction.grid)
    count = 0

    def passes(m: float) -> bool:
        nonlocal count
        count += 1
        prob = NLSProblem(a, mu, p, RadialFunction(direction.grid, m * unit), T)
        rep = picard_solve(prob, pairs, tol=1e-8, max_iter=40, times=times, op=op)
        return rep.converged and rep.observed_contraction <= target

    if not passes(lo):
        return Budget(0.0, target, count)
    while passes(hi):
        lo, hi = hi, 2 * hi
    while hi - lo > rel_tol * lo:
        mid = math.sqrt(lo * hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return Budget(lo, target, count)


@dataclass(frozen=True, eq=False)
class GlobalReport:
    solution: SpaceTimeField
    handoff_times: tuple[float, ...]
    handoff_mass: tuple[float, ...]
    max_mass_gap: float
    reports: tuple[SolveReport, ...]


def globalize(
    prob: NLSProblem,
    chunk: float,
    pairs: Sequence[AdmissiblePair] | None = None,
    *,
    nodes_per_chunk: int = 201,
    tol: float = 1e-10,
) -> GlobalReport:
    """Subcritical continuation: local Picard solves on consecutive windows of length ``chunk``.

    Each window starts from the previous window's final state; the mass at
    every hand-off is recorded and compared with the initial mass.
    """
    if prob.regime != "subcritical":
        raise ValueError("globalisation by mass hand-off is for subcritical problems")
    op = _operator(prob, None)
    n = max(1, int(math.ceil(prob.T / chunk - 1e-12)))
    edges = np.linspace(0.0, prob.T, n + 1)
    phi = prob.phi
    m0 = norm_lr(phi, 2) ** 2
    rows, times, reps, hand_t, hand_m = [], [], [], [0.0], [m0]
    for k in range(n):
        length = edges[k + 1] - edges[k]
        local = prob.with_datum(phi, length)
        rep = picard_solve(local, pairs, tol, times=TimeGrid.uniform(0.0, length, nodes_per_chunk), op=op)
        if not rep.converged:
            raise RuntimeError(f"local solve on window {k} did not converge")
        reps.append(rep)
        vals = rep.solution.values
        start = 0 if k == 0 else 1
        rows.append(vals[start:])
        times.append(edges[k] + rep.solution.times.nodes[start:])
        phi = RadialFunction(phi.grid, vals[-1])
        hand_t.append(float(edges[k + 1]))
        hand_m.append(norm_lr(phi, 2) ** 2)
    sol = SpaceTimeField(prob.phi.grid, TimeGrid(np.concatenate(times)), np.vstack(rows))
    gap = max(abs(m - m0) for m in hand_m) / m0 if m0 > 0 else 0.0
    return GlobalReport(sol, tuple(hand_t), tuple(hand_m), float(gap), tuple(reps))


def solution_map_lipschitz(
    prob: NLSProblem,
    perturbations: Iterable[np.ndarray],
    *,
    times: TimeGrid | None = None,
    tol: float = 1e-10,
) -> tuple[float, ...]:
    """``||u_delta - u||_{L^inf_t L^2_a} / ||delta||_{L^2_a}`` for each perturbation ``delta``."""
    op = _operator(prob, None)
    base = picard_solve(prob, tol=tol, times=times, op=op)
    w = prob.phi.grid.qweights
    out = []
    for d in perturbations:
        d = np.asarray(d, dtype=complex)
        nd = math.sqrt(float(np.abs(d) ** 2 @ w))
        if nd == 0:
            raise ValueError("perturbation must be non-zero")
        pert = prob.with_datum(RadialFunction(prob.phi.grid, prob.phi.values + d))
        rep = picard_solve(pert, tol=tol, times=base.solution.times, op=op)
        diff = np.sqrt(np.abs(rep.solution.values - base.solution.values) ** 2 @ w).max()
        out.append(float(diff / nd))
    return tuple(out)
