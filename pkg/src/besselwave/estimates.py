"""Dispersive, Strichartz and restriction diagnostics for the Bessel group.

None of the constants in these estimates are known in closed form, so every
check here is a ratio whose boundedness, scale invariance or window
convergence is what gets inspected.

Large times are handled by :class:`EvolutionProbe`, which evaluates
``S_a(t) phi`` with the kernel route on an output grid sized to the spreading
solution.  A datum supported in ``[0, R_x]`` with spectrum in ``[0, R_xi]``
evolves into ``[0, R_x + 2|t| R_xi]``, and ``|S_a(t) phi|^2`` varies on the
scale ``1 / min(R_x/|t|, 2 R_xi)``; both numbers set the output quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .grid import RadialFunction, RadialGrid, SpaceTimeField, TimeGrid, _lr, build_grid, mixed_norm, norm_lr
from .grid import sum_intersection_norms, trapezoid_weights
from .hankel import HankelOperator, build_hankel, fourier_hankel, kernel_rows, transform
from .propagator import PropagatorSpec, _kernel_resolvable, duhamel_hat, kernel_eval, spectral_evolve

__all__ = [
    "AdmissiblePair",
    "WeightPair",
    "admissible_q",
    "diagonal_r",
    "EvolutionProbe",
    "DecayFit",
    "dispersive_decay_fit",
    "WeightedTable",
    "weighted_dispersive_check",
    "shell_datum",
    "unweighted_growth_witness",
    "t_a_apply",
    "t_a_adjoint",
    "duality_defect",
    "StrichartzResult",
    "strichartz_ratio",
    "strichartz_ratios",
    "weighted_strichartz_bounds",
    "inhomogeneous_strichartz_ratio",
    "restriction_consistency",
    "riesz_potential",
]

_OUT_ORDER = 16
_RAD_PER_OUT_PANEL = 8.0


# --- exponents ---------------------------------------------------------------


def _r_upper(a: float) -> float:
    return 2.0 * (a + 1.0) / (a - 1.0) if a > 1 else math.inf


def admissible_q(a: float, r: float) -> float:
    """Time exponent ``q`` with ``2/q = (a+1)(1/2 - 1/r)``."""
    if not a > -1:
        raise ValueError("a must exceed -1")
    if not r > 2:
        raise ValueError("r must exceed 2")
    if not r < _r_upper(a):
        raise ValueError(f"r must be below 2(a+1)/(a-1) = {_r_upper(a):g} for a = {a:g}")
    return 2.0 / ((a + 1.0) * (0.5 - 1.0 / r))


def diagonal_r(a: float) -> float:
    """The exponent ``r = 2(a+3)/(a+1)`` for which ``(r, r)`` is admissible."""
    return 2.0 * (a + 3.0) / (a + 1.0)


def _dual(p: float) -> float:
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class AdmissiblePair:
    a: float
    q: float
    r: float

    def __post_init__(self):
        q = admissible_q(self.a, self.r)
        if not math.isclose(q, self.q, rel_tol=1e-12):
            raise ValueError(f"(q, r) = ({self.q:g}, {self.r:g}) is not admissible for a = {self.a:g}")

    @classmethod
    def from_r(cls, a: float, r: float) -> "AdmissiblePair":
        return cls(float(a), admissible_q(a, r), float(r))

    @classmethod
    def diagonal(cls, a: float) -> "AdmissiblePair":
        r = diagonal_r(a)
        return cls(float(a), admissible_q(a, r), r)

    @property
    def q_dual(self) -> float:
        return _dual(self.q)

    @property
    def r_dual(self) -> float:
        return _dual(self.r)

    def q_inf(self) -> float:
        """Largest-decay companion exponent, ``2/q_inf = (a+1)(1/2 - 1/r)`` taken with equality.

        For ``a < 0`` the pair then reads ``2/q = 1/2 - 1/r`` for the first exponent.
        """
        return 2.0 / ((self.a + 1.0) * (0.5 - 1.0 / self.r))


@dataclass(frozen=True, eq=False)
class WeightPair:
    """Weights ``k1 = min(1, x^(a/2))`` and ``u1 = max(x^(a/2), x^a)`` for ``-1 < a < 0``."""

    a: float
    x: np.ndarray

    def __post_init__(self):
        if not -1 < self.a < 0:
            raise ValueError("weights are defined for -1 < a < 0")
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))

    @property
    def k1(self) -> np.ndarray:
        return np.minimum(1.0, self.x ** (self.a / 2))

    @property
    def u1(self) -> np.ndarray:
        return np.maximum(self.x ** (self.a / 2), self.x**self.a)


def _k1(a: float, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.minimum(1.0, x ** (a / 2))


# --- large-time evaluation ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class Evolved:
    grid: RadialGrid
    values: np.ndarray
    route: str


class EvolutionProbe:
    """Evaluate ``S_a(t) phi`` at any time on a grid wide enough to hold it.

    ``op`` is an optional Hankel operator on ``phi``'s grid, used when the
    kernel quadrature cannot resolve small times; it is built on first use
    if not supplied.
    """

    def __init__(
        self,
        phi: RadialFunction,
        op: HankelOperator | None = None,
        tol: float = 1e-13,
        spectral_tol: float = 1e-11,
    ):
        self.phi = phi
        self.grid = phi.grid
        self.a = phi.grid.a
        self.nu = phi.grid.nu
        if op is not None and not op.in_grid.same_as(phi.grid):
            raise ValueError("Hankel operator does not act on the datum's grid")
        self.op = op
        mag = np.abs(phi.values)
        peak = mag.max()
        if peak == 0:
            raise ValueError("the zero datum has no evolution to probe")
        x = self.grid.nodes
        h = self.grid.x_max / self.grid.panels
        live = mag > tol * peak
        self.support = min(self.grid.x_max, float(x[live].max()) + h)
        self._y = x[live]
        self._wv = (self.grid.qweights * phi.values)[live]
        # The transform's round-off floor is near 1e-13 of its peak, hence the looser threshold.
        xi = np.linspace(0.0, self.grid.order / h, 400)
        spec = np.abs(kernel_rows(self.nu, xi, self.grid) @ phi.values)
        self.band = max(float(xi[spec > spectral_tol * spec.max()].max()), xi[1])
        self._last: tuple[float, Evolved] | None = None

    def extent(self, t: float) -> float:
        return self.support + 2.0 * abs(t) * self.band

    def _spectral(self) -> HankelOperator:
        if self.op is None:
            self.op = build_hankel(self.nu, self.grid)
        return self.op

    def _hat(self) -> np.ndarray:
        if not hasattr(self, "_hat_cache"):
            self._hat_cache = self._spectral().apply(self.phi.values)
        return self._hat_cache

    def _kernel(self, t: float, x: np.ndarray) -> np.ndarray:
        out = np.empty(x.size, dtype=complex)
        rows = max(1, 2_000_000 // max(self._y.size, 1))
        for i in range(0, x.size, rows):
            out[i : i + rows] = kernel_eval(self.a, x[i : i + rows, None], self._y[None, :], t) @ self._wv
        return out

    def evolve(self, t: float) -> Evolved:
        if self._last is not None and self._last[0] == t:
            return self._last[1]
        ev = self._evolve(t)
        self._last = (t, ev)
        return ev

    def _evolve(self, t: float) -> Evolved:
        if t == 0:
            return Evolved(self.grid, self.phi.values, "identity")
        R = self.extent(t)
        if _kernel_resolvable(self.grid, R, t, support=self.support):
            K = min(self.support / abs(t), 2.0 * self.band)
            panels = max(4, int(math.ceil(R * K / _RAD_PER_OUT_PANEL)))
            out = build_grid(self.a, R, panels, _OUT_ORDER)
            return Evolved(out, self._kernel(t, out.nodes), "kernel")
        if R <= self.grid.x_max:
            op = self._spectral()
            return Evolved(self.grid, op.apply(np.exp(-1j * t * op.xi**2) * self._hat()), "spectral")
        raise RuntimeError(f"t={t:g}: kernel unresolved and the solution leaves the spectral grid")

    def pointwise(self, t: float, x: np.ndarray, route: str) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if route == "kernel":
            return self._kernel(t, x)
        if route == "spectral":
            rows = kernel_rows(self.nu, x, self._spectral().out_grid)
            return rows @ (np.exp(-1j * t * self.op.xi**2) * self._hat())
        return np.interp(x, self.grid.nodes, self.phi.values.real) + 1j * np.interp(x, self.grid.nodes, self.phi.values.imag)

    def sup(self, t: float, weight: Callable[[np.ndarray], np.ndarray] | None = None, candidates: int = 8) -> float:
        """``sup_x |S_a(t) phi| w(x)``, refined around the largest local maxima of the samples."""
        ev = self.evolve(t)
        x = ev.grid.nodes

        def wmag(xs, vals):
            return np.abs(vals) * (weight(xs) if weight is not None else 1.0)

        mag = wmag(x, ev.values)
        if ev.route == "identity":
            return float(mag.max())
        padded = np.concatenate(([-np.inf], mag, [-np.inf]))
        peaks = np.flatnonzero((padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:]))
        peaks = peaks[np.argsort(mag[peaks])[::-1][:candidates]]
        best, best_x, span = float(mag.max()), None, 0.0
        for j in peaks:
            lo = x[j - 1] if j > 0 else 0.0
            hi = x[j + 1] if j + 1 < x.size else x[j]
            xs = np.linspace(lo, hi, 33)
            fine = wmag(xs, self.pointwise(t, xs, ev.route))
            k = int(np.argmax(fine))
            if fine[k] > best:
                best, best_x, span = float(fine[k]), xs[k], xs[1] - xs[0]
        if best_x is not None:
            xs = np.linspace(max(0.0, best_x - span), best_x + span, 33)
            best = max(best, float(wmag(xs, self.pointwise(t, xs, ev.route)).max()))
        return best

    def lr(self, t: float, r: float, weight: Callable[[np.ndarray], np.ndarray] | None = None) -> float:
        if math.isinf(r):
            return self.sup(t, weight)
        ev = self.evolve(t)
        vals = ev.values * (weight(ev.grid.nodes) if weight is not None else 1.0)
        return float(_lr(vals, ev.grid.qweights, r))


def _probe_pair(phi: RadialFunction, op: HankelOperator | None):
    """Probes for ``t >= 0`` and (via conjugation) for ``t < 0``."""
    fwd = EvolutionProbe(phi, op)
    if np.all(phi.values.imag == 0):
        return fwd, fwd
    return fwd, EvolutionProbe(RadialFunction(phi.grid, np.conj(phi.values)), op)


def _norm_at(probes, t: float, r: float, weight=None) -> float:
    # |S(-t) phi| = |S(t) conj(phi)|
    return probes[0].lr(t, r, weight) if t >= 0 else probes[1].lr(-t, r, weight)


# --- dispersive estimates ----------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    residual: float
    degenerate: bool
    times: tuple[float, ...]
    values: tuple[float, ...]


def _loglog_fit(t: np.ndarray, v: np.ndarray) -> DecayFit:
    ok = np.all(v > 0) and np.all(np.isfinite(v))
    span = math.log10(t.max() / t.min()) if t.min() > 0 else 0.0
    if not ok or t.size < 3:
        return DecayFit(math.nan, math.nan, math.inf, True, tuple(t), tuple(v))
    X, Y = np.log(t), np.log(v)
    A = np.vstack((X, np.ones_like(X))).T
    (slope, icpt), *_ = np.linalg.lstsq(A, Y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([slope, icpt]) - Y) ** 2)))
    return DecayFit(float(slope), float(icpt), resid, span < 2.0, tuple(t.tolist()), tuple(v.tolist()))


def dispersive_decay_fit(
    a: float,
    phi: RadialFunction,
    t_set: Sequence[float],
    r: float = math.inf,
    op: HankelOperator | None = None,
) -> DecayFit:
    """Least-squares slope of ``log ||S_a(t) phi||_{L^r_a}`` against ``log t``.

    ``r = inf`` gives the sup-norm decay, expected ``-(a+1)/2``; finite ``r``
    gives the ``L^r_a`` decay, expected ``-(a+1)(1/2 - 1/r)``.  The fit is
    flagged degenerate when the times span less than two decades or a norm
    vanishes.
    """
    if a < 0:
        raise ValueError("the unweighted decay fit needs a >= 0")
    if not math.isclose(phi.grid.a, a, abs_tol=1e-12):
        raise ValueError("datum grid weight does not match a")
    t = np.asarray(t_set, dtype=float)
    if np.any(t <= 0):
        raise ValueError("times must be positive")
    probe = EvolutionProbe(phi, op)
    vals = np.array([probe.lr(tk, r) for tk in t])
    return _loglog_fit(t, vals)


@dataclass(frozen=True)
class WeightedTable:
    times: tuple[float, ...]
    sup_ratios: tuple[float, ...]
    lr_ratios: tuple[float, ...]
    unweighted: tuple[float, ...]
    r: float

    @property
    def sup_of_sup_ratio(self) -> float:
        return max(self.sup_ratios)

    @property
    def sup_of_lr_ratio(self) -> float:
        return max(self.lr_ratios) if self.lr_ratios else math.nan


def _weighted_rows(a: float, probe: EvolutionProbe, t: np.ndarray, r: float | None):
    phi = probe.phi
    x, w = phi.grid.nodes, phi.grid.qweights
    k1 = _k1(a, x)
    mag = np.abs(phi.values)
    l1_u1 = float(w @ (mag / k1))  # ||phi u1||_{L^1(dx)} = ||phi / k1||_{L^1_a}
    l1_a = float(w @ mag)
    sup_r, lr_r, unw = [], [], []
    for tk in t:
        s = probe.sup(tk, lambda z: _k1(a, z))
        sup_r.append(s / ((tk ** (-(a + 1) / 2) + tk**-0.5) * l1_u1))
        unw.append(probe.sup(tk) * tk ** ((a + 1) / 2) / l1_a)
        if r is not None:
            e = 1.0 - 2.0 / r
            num = probe.lr(tk, r, lambda z: _k1(a, z) ** e)
            den_norm = float(_lr(phi.values * k1 ** (-e), w, _dual(r)))
            decay = tk ** (-(a + 1) * (0.5 - 1 / r)) + tk ** (-(0.5 - 1 / r))
            lr_r.append(num / (decay * den_norm))
    return sup_r, lr_r, unw


def weighted_dispersive_check(
    a: float,
    phi: RadialFunction,
    t_set: Sequence[float],
    r: float | None = 4.0,
    op: HankelOperator | None = None,
) -> WeightedTable:
    """Ratios of the weighted dispersive bounds for ``-1 < a < 0``.

    For each ``t`` the table holds ``||S_a(t) phi k1||_inf`` over
    ``(t^-(a+1)/2 + t^-1/2) ||phi u1||_{L^1(dx)}``, the same with ``L^r_a`` and
    weights ``k1^(1-2/r)``, ``k1^(1-2/r')``, and the unweighted ratio
    ``sup|S_a(t) phi| t^((a+1)/2) / ||phi||_{L^1_a}``.
    """
    if not -1 < a < 0:
        raise ValueError("the weighted check needs -1 < a < 0")
    t = np.asarray(t_set, dtype=float)
    if np.any(t <= 0):
        raise ValueError("times must be positive")
    probe = EvolutionProbe(phi, op)
    sup_r, lr_r, unw = _weighted_rows(a, probe, t, r)
    return WeightedTable(tuple(t.tolist()), tuple(sup_r), tuple(lr_r), tuple(unw), math.nan if r is None else r)


def shell_datum(a: float, center: float, width: float, panels_per_width: float = 0.5, order: int = 24) -> RadialFunction:
    """Gaussian bump ``exp(-(x - center)^2 / (2 width^2))`` on a grid just wide enough to hold it."""
    x_max = center + 10.0 * width
    panels = max(8, int(math.ceil(x_max * panels_per_width / width)))
    grid = build_grid(a, x_max, panels, order)
    return RadialFunction(grid, np.exp(-((grid.nodes - center) ** 2) / (2 * width * width)))


def unweighted_growth_witness(
    a: float,
    t_set: Sequence[float] = (1.0, 2.0, 4.0, 8.0, 16.0),
    width: float = 0.25,
    offset: Callable[[float], float] = lambda t: 2.0 * t,
) -> WeightedTable:
    """Weighted and unweighted ratios along bumps centred at ``offset(t)``.

    For a fixed smooth datum the unweighted ratio stays bounded as ``t`` grows,
    so growth is exhibited along data whose mass sits at radius comparable to
    ``t``; there it behaves like ``(offset^2 / t)^(|a|/2)``.
    """
    if not -1 < a < 0:
        raise ValueError("the witness is meant for -1 < a < 0")
    rows = ([], [], [])
    for tk in t_set:
        probe = EvolutionProbe(shell_datum(a, offset(tk), width))
        s, _, u = _weighted_rows(a, probe, np.array([tk]), None)
        rows[0].append(s[0])
        rows[2].append(u[0])
    return WeightedTable(tuple(float(t) for t in t_set), tuple(rows[0]), (), tuple(rows[2]), math.nan)


# --- the operator T_a and its adjoint -----------------------------------------


def _spectral_op(spec: PropagatorSpec, grid: RadialGrid) -> HankelOperator:
    op = spec.hankel_op
    if op is None:
        raise ValueError("this operation uses the spectral route")
    if not grid.same_as(op.in_grid):
        raise ValueError("field does not live on the propagator's grid")
    return op


def t_a_apply(spec: PropagatorSpec, F: SpaceTimeField) -> RadialFunction:
    """``T_a F = sum_k tau_k S_a(-t_k) F(., t_k)``, combined in Hankel space."""
    op = _spectral_op(spec, F.grid)
    hat = op.apply(F.values)
    phase = np.exp(1j * np.multiply.outer(F.times.nodes, op.xi**2))
    acc = F.times.qweights @ (phase * hat)
    return RadialFunction(F.grid, op.apply(acc))


def t_a_adjoint(spec: PropagatorSpec, phi: RadialFunction, times: TimeGrid) -> SpaceTimeField:
    """``(T_a^* phi)(., t) = S_a(t) phi`` sampled on ``times``."""
    op = _spectral_op(spec, phi.grid)
    return SpaceTimeField(phi.grid, times, spectral_evolve(op, times.nodes, phi.values))


def duality_defect(spec: PropagatorSpec, F: SpaceTimeField, phi: RadialFunction) -> float:
    """Relative gap between ``<T_a F, phi>`` and ``<F, T_a^* phi>``."""
    w = F.grid.qweights
    lhs = np.vdot(phi.values, w * t_a_apply(spec, F).values)
    adj = t_a_adjoint(spec, phi, F.times).values
    rhs = F.times.qweights @ np.einsum("kj,kj->k", np.conj(adj), w * F.values)
    scale = max(abs(lhs), abs(rhs))
    return 0.0 if scale == 0 else float(abs(lhs - rhs) / scale)


# --- Strichartz ratios -------------------------------------------------------


@dataclass(frozen=True)
class StrichartzResult:
    ratio: float
    norm: float
    data_norm: float
    tail_fraction: float
    window: float


def _check_pair(pair: AdmissiblePair, a: float) -> None:
    if not math.isclose(pair.a, a, abs_tol=1e-12):
        raise ValueError("pair was built for a different a")


def _time_profile(probes, times: np.ndarray, r: float, weight=None, cache: dict | None = None) -> np.ndarray:
    cache = {} if cache is None else cache
    real = probes[0] is probes[1]

    def norm(t):
        # Real data: |S(-t) phi| = |S(t) phi|, so only |t| matters.
        key = abs(t) if real else t
        if key not in cache:
            cache[key] = _norm_at(probes, key, r, weight)
        return cache[key]

    return np.array([norm(float(t)) for t in times])


def _tail_fraction(times: np.ndarray, g: np.ndarray, power: float, total: float) -> float:
    """Estimated share of ``int g`` beyond the window, for ``g ~ |t|^-power``."""
    if total == 0 or power <= 1:
        return math.inf if power <= 1 else 0.0
    ends = (0, -1) if times[0] < 0 else (-1,)
    tail = sum(g[k] * abs(times[k]) / (power - 1.0) for k in ends)
    return float(tail / (total + tail))


def strichartz_ratio(
    spec: PropagatorSpec,
    pair: AdmissiblePair,
    phi: RadialFunction,
    T_window: float = 40.0,
    *,
    dt: float = 0.04,
    growth: float = 1.05,
) -> StrichartzResult:
    """``||S_a(t) phi||_{L^q_t L^r_a}`` over ``[-T, T]`` divided by ``||phi||_{L^2_a}``."""
    return strichartz_ratios(spec, pair, phi, (T_window,), dt=dt, growth=growth)[0]


def strichartz_ratios(
    spec: PropagatorSpec,
    pair: AdmissiblePair,
    phi: RadialFunction,
    windows: Sequence[float],
    *,
    dt: float = 0.04,
    growth: float = 1.05,
) -> tuple[StrichartzResult, ...]:
    """:func:`strichartz_ratio` for several windows, sharing the evolutions they have in common."""
    _check_pair(pair, spec.a)
    if spec.a < 0:
        raise ValueError("the unweighted Strichartz ratio needs a >= 0")
    d = norm_lr(phi, 2)
    if d == 0:
        raise ValueError("the ratio is undefined for the zero datum")
    probes = _probe_pair(phi, spec.hankel_op)
    cache: dict = {}
    out = []
    for T in windows:
        times = TimeGrid.hybrid(T, dt=dt, growth=growth)
        g = _time_profile(probes, times.nodes, pair.r, cache=cache) ** pair.q
        integral = float(times.qweights @ g)
        tail = _tail_fraction(times.nodes, g, pair.q * (spec.a + 1) * (0.5 - 1 / pair.r), integral)
        norm = integral ** (1 / pair.q)
        out.append(StrichartzResult(norm / d, norm, d, tail, T))
    return tuple(out)


def weighted_strichartz_bounds(
    a: float,
    r: float,
    phi: RadialFunction,
    T_window: float = 40.0,
    q_inf: float | None = None,
    op: HankelOperator | None = None,
    *,
    dt: float = 0.04,
    growth: float = 1.05,
) -> tuple[float, float, float]:
    """Time norms of ``||S_a(t) phi k1^(2/r - 1)||_{L^r_a}`` for ``-1 < a < 0``.

    ``q`` solves ``2/q = 1/2 - 1/r``; ``q_inf`` defaults to the equality case
    ``2/q_inf = (a+1)(1/2 - 1/r)``.  Returns ``(sum_norm_upper_bound,
    intersection_norm, ||phi||_{L^2_a})``; the first is an upper bound from a
    split at ``|t| = 1``.
    """
    if not -1 < a < 0:
        raise ValueError("the weighted bounds need -1 < a < 0")
    q = 2.0 / (0.5 - 1.0 / r)
    q_inf = 2.0 / ((a + 1.0) * (0.5 - 1.0 / r)) if q_inf is None else q_inf
    if 2.0 / q_inf > (a + 1.0) * (0.5 - 1.0 / r) + 1e-12:
        raise ValueError("q_inf violates 2/q_inf <= (a+1)(1/2 - 1/r)")
    times = TimeGrid.hybrid(T_window, dt=dt, growth=growth)
    probes = _probe_pair(phi, op)
    e = 2.0 / r - 1.0
    prof = _time_profile(probes, times.nodes, r, lambda z: _k1(a, z) ** e)
    # Feed the spatial norms through the mixed-norm helper on a one-node grid.
    unit = RadialGrid(a, np.array([1.0]), np.array([1.0]), 1.0, 1, 1)
    field = SpaceTimeField(unit, times, prof[:, None])
    both, upper = sum_intersection_norms(field, q, q_inf, r)
    return upper, both, norm_lr(phi, 2)


def inhomogeneous_strichartz_ratio(
    spec: PropagatorSpec,
    pair: AdmissiblePair,
    pair_dual_source: AdmissiblePair,
    F: SpaceTimeField,
    T_window: float = 40.0,
    *,
    growth: float = 1.05,
) -> StrichartzResult:
    """``||v||_{L^q_t L^r_a} / ||F||_{L^q~'_t L^r~'_a}`` for ``v = int_0^t S_a(t-s) F(s) ds``.

    ``F`` must vanish outside its own time nodes, which must lie in
    ``[0, T]``.  Inside the support ``v`` is accumulated spectrally; after it,
    ``v(t) = S_a(t - t_1) v(t_1)`` is evaluated by the kernel route.
    """
    _check_pair(pair, spec.a)
    _check_pair(pair_dual_source, spec.a)
    op = _spectral_op(spec, F.grid)
    tn = F.times.nodes
    if tn[0] < 0 or tn[-1] >= T_window:
        raise ValueError("source support must lie inside [0, T_window)")
    src = mixed_norm(F, pair_dual_source.q_dual, pair_dual_source.r_dual)
    if src == 0:
        raise ValueError("the ratio is undefined for a vanishing source")
    hat = duhamel_hat(op, tn, op.apply(F.values))
    inside = op.apply(hat)  # rows: v(t_k)
    prof_in = _lr(inside, F.grid.qweights, pair.r)
    v_end = RadialFunction(F.grid, inside[-1])
    rest = TimeGrid.hybrid(T_window - tn[-1], growth=growth).nodes
    rest = rest[rest > 0]
    probes = _probe_pair(v_end, op)
    prof_out = np.array([probes[0].lr(s, pair.r) for s in rest])
    times = np.concatenate(([0.0] if tn[0] > 0 else [], tn, tn[-1] + rest))
    prof = np.concatenate(([0.0] if tn[0] > 0 else [], prof_in, prof_out))
    g = prof**pair.q
    integral = float(trapezoid_weights(times) @ g)
    tail = _tail_fraction(times, g, pair.q * (spec.a + 1) * (0.5 - 1 / pair.r), integral)
    norm = integral ** (1 / pair.q)
    return StrichartzResult(norm / src, norm, src, tail, T_window)


# --- restriction -------------------------------------------------------------


def restriction_consistency(spec: PropagatorSpec, F: SpaceTimeField, pair: AdmissiblePair | None = None):
    """``(lhs, rhs_norm, route_defect)`` for the Fourier-Hankel restriction to the parabola.

    ``lhs`` is the ``L^2_a`` norm of the Fourier-Hankel transform of ``F`` on
    ``tau = -xi^2 / (2 pi)`` at the grid nodes; ``route_defect`` compares it
    pointwise with the Hankel transform of ``T_a F``; ``rhs_norm`` is
    ``||F||_{L^q'_t L^r'_a}`` for ``pair`` (diagonal by default).
    """
    if spec.a < 0:
        raise ValueError("the restriction check needs a >= 0")
    op = _spectral_op(spec, F.grid)
    pair = pair if pair is not None else AdmissiblePair.diagonal(spec.a)
    _check_pair(pair, spec.a)
    if not np.any(F.values):
        return 0.0, 0.0, 0.0
    xi = op.xi
    on_parabola = fourier_hankel(F, op.nu, np.column_stack((xi, -(xi**2) / (2 * math.pi))), op)
    via_t = transform(op, t_a_apply(spec, F)).values
    w = op.out_grid.qweights
    lhs = math.sqrt(float(w @ np.abs(on_parabola) ** 2))
    defect = math.sqrt(float(w @ np.abs(on_parabola - via_t) ** 2)) / lhs
    rhs = mixed_norm(F, pair.q_dual, pair.r_dual)
    return lhs, rhs, defect


# --- fractional integration --------------------------------------------------


def _riesz_moments(m: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """``A(m) = int_0^1 |m - d|^(beta-1) dd`` and ``B(m) = int_0^1 d |m - d|^(beta-1) dd`` for integer ``m``."""
    m = m.astype(float)
    A = np.empty_like(m)
    B = np.empty_like(m)
    b1 = beta + 1.0
    pos = m >= 1
    mp = m[pos]
    A[pos] = (mp**beta - (mp - 1) ** beta) / beta
    B[pos] = mp * A[pos] - (mp**b1 - (mp - 1) ** b1) / b1
    n = -m[~pos]
    A[~pos] = ((n + 1) ** beta - n**beta) / beta
    B[~pos] = ((n + 1) ** b1 - n**b1) / b1 - n * A[~pos]
    return A, B


def riesz_potential(h: np.ndarray, times: np.ndarray, beta: float, interpolation: str = "linear") -> np.ndarray:
    """``(h * |.|^-(1-beta))(t_i)`` on a uniform grid.

    ``interpolation="linear"`` takes ``h`` piecewise linear between samples;
    ``"cells"`` holds ``h_j`` constant on ``[t_j - dt/2, t_j + dt/2]``, which
    represents step functions exactly when their jumps sit on cell edges.
    Either way ``h`` is zero outside the grid and every cell is integrated
    exactly against the kernel, so the singularity at ``s = t_i`` costs
    nothing special.
    """
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    if interpolation not in ("linear", "cells"):
        raise ValueError("interpolation must be 'linear' or 'cells'")
    t = np.asarray(times, dtype=float)
    h = np.asarray(h)
    if t.shape != h.shape or t.size < 2:
        raise ValueError("need at least two samples aligned with the times")
    step = np.diff(t)
    if not np.allclose(step, step[0], rtol=1e-9, atol=0):
        raise ValueError("times must be uniformly spaced")
    n = t.size
    m = np.arange(-(n - 1), n)  # offset i - j
    if interpolation == "cells":
        am = np.abs(m).astype(float)
        c = np.where(am == 0, 2 * 0.5**beta / beta, ((am + 0.5) ** beta - np.abs(am - 0.5) ** beta) / beta)
        out = _conv(h, c)[n - 1 : 2 * n - 1]
    else:
        # Cell [t_j, t_j+1] contributes h_j (A - B)(i - j) + h_{j+1} B(i - j).
        A, B = _riesz_moments(m, beta)
        out = _conv(h[:-1], A - B)[n - 1 : 2 * n - 1] + _conv(h[1:], B)[n - 1 : 2 * n - 1]
    return step[0] ** beta * out


def _conv(x: np.ndarray, k: np.ndarray) -> np.ndarray:
    if x.size * k.size <= 4_000_000:
        return np.convolve(x, k)
    if np.iscomplexobj(x):
        return fftconvolve(x.real, k) + 1j * fftconvolve(x.imag, k)
    return fftconvolve(x, k)
