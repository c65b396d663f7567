"""The unitary group generated by the Bessel operator ``B_a = d^2/dx^2 + (a/x) d/dx``.

Two routes are provided.  The spectral route diagonalises ``B_a`` with the
order ``nu = (a-1)/2`` Hankel transform, where the group acts as the
multiplier ``exp(-i t xi^2)``.  The kernel route integrates the closed-form
kernel

    S_a(x, y, t) = exp(-i (a+1) pi/4) (2|t|)^(-(a+1)/2) G_nu(xy/2|t|) exp(i (x^2+y^2)/4|t|)

(complex-conjugated for ``t < 0``) against ``y^a dy`` and can be evaluated at
arbitrary output points, which is what the large-time diagnostics need.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .grid import RadialFunction, RadialGrid, SpaceTimeField, TimeGrid, build_grid, norm_lr
from .hankel import HankelOperator, build_hankel, fd_derivatives
from .oscint import Extrapolation, damped_integral, default_schedule, richardson_to_zero
from .specfun import bessel_g, bessel_y, gamma

__all__ = [
    "PropagatorSpec",
    "BoundaryData",
    "BoundarySolution",
    "kernel_eval",
    "kernel_apply",
    "apply_propagator",
    "spectral_evolve",
    "mass_integral",
    "mass_integral_closed_form",
    "duhamel",
    "duhamel_hat",
    "inhomogeneous_bc_solve",
    "weighted_flux",
    "boundary_flux",
    "eigenfunction_residual",
    "KernelResolutionWarning",
]

log = logging.getLogger(__name__)

# Largest phase change (radians) per quadrature panel accepted by the kernel route.
_KERNEL_RAD_PER_PANEL = 24.0
_CHUNK_ENTRIES = 2_000_000


class KernelResolutionWarning(RuntimeWarning):
    """The kernel quadrature cannot resolve the requested time; spectral route used instead."""


@dataclass(frozen=True, eq=False)
class PropagatorSpec:
    a: float
    method: str = "spectral"
    hankel_op: HankelOperator | None = None
    damping: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.a > -1:
            raise ValueError("a must exceed -1")
        if self.method not in ("spectral", "kernel"):
            raise ValueError("method must be 'spectral' or 'kernel'")
        if self.hankel_op is not None and not math.isclose(self.hankel_op.nu, self.nu, abs_tol=1e-12):
            raise ValueError("Hankel operator order does not match (a-1)/2")
        if self.method == "spectral" and self.hankel_op is None:
            raise ValueError("spectral method needs a Hankel operator")

    @property
    def nu(self) -> float:
        return 0.5 * (self.a - 1.0)

    @property
    def grid(self) -> RadialGrid | None:
        return self.hankel_op.in_grid if self.hankel_op is not None else None

    @classmethod
    def on_grid(cls, grid: RadialGrid, method: str = "spectral", damping: Sequence[float] = ()) -> "PropagatorSpec":
        return cls(grid.a, method, build_hankel(0.5 * (grid.a - 1.0), grid), tuple(damping))


def kernel_eval(a: float, x, y, t: float):
    """Closed-form propagator kernel ``S_a(x, y, t)``; broadcasts over ``x`` and ``y``.

    At ``x = 0`` (or ``y = 0``) the regular kernel ``G_nu`` gives the finite limit
    ``exp(-i(a+1)pi/4) / (2^a Gamma((a+1)/2)) |t|^(-(a+1)/2) exp(i y^2 / 4|t|)``.
    """
    if t == 0:
        raise ValueError("the kernel is singular at t = 0")
    if not a > -1:
        raise ValueError("a must exceed -1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("x and y must be non-negative")
    nu = 0.5 * (a - 1.0)
    s = abs(t)
    pref = np.exp(-1j * (a + 1.0) * math.pi / 4.0) * (2.0 * s) ** (-(a + 1.0) / 2.0)
    val = pref * bessel_g(nu, x * y / (2.0 * s)) * np.exp(1j * (x * x + y * y) / (4.0 * s))
    out = val if t > 0 else np.conj(val)
    return complex(out) if out.ndim == 0 else out


def _kernel_resolvable(grid: RadialGrid, x_out_max: float, t: float, support: float | None = None) -> bool:
    y_max = grid.x_max if support is None else support
    width = grid.x_max / grid.panels
    rate = (x_out_max + y_max) / (2.0 * abs(t))
    return rate * width <= _KERNEL_RAD_PER_PANEL * grid.order / 24.0


def kernel_apply(
    a: float,
    t: float,
    phi: RadialFunction,
    x_out: np.ndarray | None = None,
    damping: Sequence[float] = (),
    tol: float = 1e-6,
) -> tuple[np.ndarray, Extrapolation | None]:
    """``int S_a(x, y, t) phi(y) y^a dy`` by quadrature on ``phi``'s grid.

    With a non-empty ``damping`` schedule the datum is multiplied by
    ``exp(-eps y^2)`` for each ``eps`` and the results are extrapolated to
    ``eps = 0``; the extrapolation record is returned alongside.
    """
    grid = phi.grid
    if not math.isclose(grid.a, a, abs_tol=1e-12):
        raise ValueError("datum grid weight does not match a")
    x_out = grid.nodes if x_out is None else np.asarray(x_out, dtype=float)
    y, w = grid.nodes, grid.qweights

    def once(eps: float) -> np.ndarray:
        wv = w * phi.values * (np.exp(-eps * y * y) if eps > 0 else 1.0)
        out = np.empty(x_out.size, dtype=complex)
        rows = max(1, _CHUNK_ENTRIES // max(y.size, 1))
        for i in range(0, x_out.size, rows):
            k = kernel_eval(a, x_out[i : i + rows, None], y[None, :], t)
            out[i : i + rows] = k @ wv
        return out

    if not damping:
        return once(0.0), None
    vals = [once(e) for e in damping]
    stack = np.array(vals)
    # Extrapolate componentwise; report the worst component's convergence.
    ext = [richardson_to_zero(damping, stack[:, j], tol) for j in range(stack.shape[1])]
    worst = max(ext, key=lambda e: e.error)
    return np.array([e.value for e in ext]), worst


def spectral_evolve(op: HankelOperator, t: float | np.ndarray, values: np.ndarray) -> np.ndarray:
    """``H(exp(-i t xi^2) H phi)``; a vector ``t`` returns one row per time."""
    hat = op.apply(values)
    t = np.asarray(t, dtype=float)
    if t.ndim == 0:
        return op.apply(np.exp(-1j * float(t) * op.xi**2) * hat)
    return op.apply(np.exp(-1j * np.multiply.outer(t, op.xi**2)) * hat)


def apply_propagator(spec: PropagatorSpec, t: float, phi: RadialFunction) -> RadialFunction:
    """``S_a(t) phi`` on ``phi``'s grid.  ``t = 0`` returns ``phi`` unchanged."""
    if t == 0:
        return phi
    if spec.grid is not None and not phi.grid.same_as(spec.grid):
        raise ValueError("datum does not live on the propagator's grid")
    if spec.method == "kernel":
        if _kernel_resolvable(phi.grid, phi.grid.x_max, t):
            vals, ext = kernel_apply(spec.a, t, phi, damping=spec.damping)
            if ext is None or ext.converged:
                return RadialFunction(phi.grid, vals)
            reason = "damping extrapolation did not converge"
        else:
            reason = f"kernel oscillation unresolved at t={t:g}"
        if spec.hankel_op is None:
            raise RuntimeError(reason)
        warnings.warn(f"{reason}; using the spectral route", KernelResolutionWarning, stacklevel=2)
    return RadialFunction(phi.grid, spectral_evolve(spec.hankel_op, t, phi.values))


def mass_integral_closed_form(a: float, x: float, t: float, eps: float = 0.0) -> complex:
    """Value of ``int S_a(x,y,t) exp(-eps y^2) y^a dy`` from the Gaussian Hankel integral."""
    s = abs(t)
    val = (1.0 + 4j * s * eps) ** (-(a + 1.0) / 2.0) * np.exp(
        1j * x * x / (4 * s) - x * x / (16 * s * s * (eps - 1j / (4 * s)))
    )
    return complex(val if t > 0 else np.conj(val))


def mass_integral(
    a: float,
    x: float,
    t: float,
    schedule: Sequence[float] | None = None,
    tol: float = 1e-6,
) -> Extrapolation:
    """Regularised ``int_0^inf S_a(x, y, t) y^a dy`` (expected value 1 for -1 < a < 2).

    The integrand is damped by ``exp(-eps y^2)`` and the damped integrals are
    extrapolated to ``eps = 0``.
    """
    if not -1.0 < a < 2.0:
        raise ValueError("the regularised mass integral is only asserted for -1 < a < 2")
    if t == 0:
        raise ValueError("t must be non-zero")
    if x < 0:
        raise ValueError("x must be non-negative")
    schedule = tuple(schedule) if schedule is not None else default_schedule(1e-2, 5)
    nu = 0.5 * (a - 1.0)
    s = abs(t)
    pref = np.exp(-1j * (a + 1.0) * math.pi / 4.0) * (2.0 * s) ** (-(a + 1.0) / 2.0)

    def smooth(y):
        return pref * bessel_g(nu, x * y / (2 * s)) * np.exp(1j * (x * x + y * y) / (4 * s))

    vals = [damped_integral(smooth, e, lambda Z: (Z + x) / (2 * s), origin_power=a) for e in schedule]
    ext = richardson_to_zero(schedule, vals, tol)
    if t < 0:
        ext = Extrapolation(np.conj(ext.value), ext.error, ext.converged, tuple(np.conj(ext.samples)))
    return ext


def duhamel_hat(op: HankelOperator, times: np.ndarray, F_hat: np.ndarray) -> np.ndarray:
    """Hankel-space Duhamel integrals ``int_{t_0}^{t_m} exp(-i(t_m - s) xi^2) F_hat(s) ds`` for every node.

    ``F_hat`` has one row per time node; the trapezoid rule in ``s`` is used
    on the (possibly non-uniform) nodes, starting at ``times[0]``.
    """
    xi2 = op.xi**2
    g = np.exp(1j * np.multiply.outer(times, xi2)) * F_hat
    dt = np.diff(times)[:, None]
    incr = 0.5 * dt * (g[:-1] + g[1:])
    cum = np.vstack((np.zeros((1, g.shape[1]), dtype=complex), np.cumsum(incr, axis=0)))
    return np.exp(-1j * np.multiply.outer(times, xi2)) * cum


def _interp_rows(times: np.ndarray, values: np.ndarray, t: float) -> np.ndarray:
    k = int(np.searchsorted(times, t))
    if k < times.size and times[k] == t:
        return values[k]
    lo, hi = k - 1, k
    w = (t - times[lo]) / (times[hi] - times[lo])
    return (1 - w) * values[lo] + w * values[hi]


def duhamel(spec: PropagatorSpec, F: SpaceTimeField, t: float) -> RadialFunction:
    """``int_0^t S_a(t - s) F(., s) ds`` by the trapezoid rule in ``s``.

    Each time node costs one forward transform; the multipliers are combined
    in Hankel space and a single inverse transform is applied at the end.
    Values of ``F`` at ``0`` and ``t`` are linearly interpolated if those are
    not nodes.
    """
    op = spec.hankel_op
    if op is None:
        raise ValueError("Duhamel integration uses the spectral route")
    if not F.grid.same_as(op.in_grid):
        raise ValueError("source does not live on the propagator's grid")
    tn = F.times.nodes
    lo, hi = min(0.0, t), max(0.0, t)
    if lo < tn[0] - 1e-14 or hi > tn[-1] + 1e-14:
        raise ValueError("integration range [0, t] is outside the source's time grid")
    if t == 0:
        return RadialFunction(F.grid, np.zeros(F.grid.size, dtype=complex))
    inner = tn[(tn > lo) & (tn < hi)]
    s = np.concatenate(([lo], inner, [hi]))
    rows = np.array([_interp_rows(tn, F.values, si) for si in s])
    hat = op.apply(rows)
    w = np.zeros_like(s)
    d = np.diff(s)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    acc = (w[:, None] * np.exp(-1j * np.multiply.outer(t - s, op.xi**2)) * hat).sum(axis=0)
    sign = 1.0 if t > 0 else -1.0
    return RadialFunction(F.grid, sign * op.apply(acc))


@dataclass(frozen=True)
class BoundaryData:
    """Prescribed weighted flux ``Phi(t)`` at the origin with its derivative."""

    times: np.ndarray
    values: np.ndarray
    derivative: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        d = np.asarray(self.derivative, dtype=complex)
        if not (t.shape == v.shape == d.shape):
            raise ValueError("times, values and derivative must align")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "derivative", d)
        if t[0] <= 0 <= t[-1] and abs(np.interp(0.0, t, v.real) + 1j * np.interp(0.0, t, v.imag)) > 1e-12:
            raise ValueError("boundary datum must vanish at t = 0")

    @classmethod
    def from_callables(cls, times, phi: Callable, dphi: Callable) -> "BoundaryData":
        t = np.asarray(times, dtype=float)
        return cls(t, phi(t), dphi(t))

    def at(self, t: float) -> complex:
        return complex(np.interp(t, self.times, self.values.real) + 1j * np.interp(t, self.times, self.values.imag))


@dataclass(frozen=True, eq=False)
class BoundarySolution:
    """``v = lift(x) Phi(t) + u`` with ``lift = x^(1-a)/(1-a)`` and ``u`` obeying the Neumann condition."""

    v: RadialFunction
    regular: RadialFunction
    flux_value: complex


def inhomogeneous_bc_solve(
    spec: PropagatorSpec,
    G: SpaceTimeField | None,
    bc: BoundaryData,
    phi: RadialFunction,
    t: float,
) -> BoundarySolution:
    """Solve ``v_t = i B_a v + G`` with weighted flux ``x^a v_x -> Phi(t)`` at the origin.

    The flux is carried by the lift ``x^(1-a)/(1-a) Phi(t)``; the remainder is
    a Neumann solution with source ``G - lift * Phi'``.  The lift grows for
    ``a < 1``, so only the near-origin behaviour is meaningful on a truncated
    grid.
    """
    a = spec.a
    if a == 1.0:
        raise ValueError("a = 1 needs the logarithmic lift, which is not supported")
    op = spec.hankel_op
    if op is None:
        raise ValueError("the boundary solver uses the spectral route")
    grid = op.in_grid
    x = grid.nodes
    lift = x ** (1.0 - a) / (1.0 - a)
    times = bc.times
    src = -np.multiply.outer(bc.derivative, lift)
    if G is not None:
        if not np.allclose(G.times.nodes, times):
            raise ValueError("source and boundary data must share time nodes")
        src = src + G.values
    F = SpaceTimeField(grid, TimeGrid(times), src)
    u = apply_propagator(spec, t, phi).values + duhamel(spec, F, t).values
    flux = bc.at(t)
    return BoundarySolution(RadialFunction(grid, lift * flux + u), RadialFunction(grid, u), flux)


def weighted_flux(op: HankelOperator, f: RadialFunction, x_points: np.ndarray) -> np.ndarray:
    """``x^a f'(x)`` computed through the Hankel representation of ``f``."""
    x_points = np.asarray(x_points, dtype=float)
    hat = op.apply(f.values)
    xi, w = op.xi, op.out_grid.qweights
    # d/dx G_nu(x xi) = -x xi^2 G_{nu+1}(x xi)
    dk = -x_points[:, None] * xi**2 * bessel_g(op.nu + 1.0, np.multiply.outer(x_points, xi))
    return x_points ** op.in_grid.a * (dk @ (w * hat))


def boundary_flux(spec: PropagatorSpec, sol: BoundarySolution, n_points: int = 3) -> complex:
    """Weighted flux of ``sol.v`` extrapolated to ``x = 0`` from the smallest nodes."""
    x = spec.grid.nodes[:n_points]
    f = sol.flux_value + weighted_flux(spec.hankel_op, sol.regular, x)
    coef = np.polyfit(x, f, n_points - 1)
    return complex(coef[-1])


def eigenfunction_residual(a: float, kappa: float, x_max: float = 10.0, panels: int = 40, order: int = 24):
    """Checks on the generalised eigenfunctions of ``B_a`` with eigenvalue ``-kappa``.

    Returns ``(residual, flux_regular, flux_singular)``: the relative
    ``L^2_a`` size of ``B_a f1 + kappa f1`` with derivatives by fourth-order
    finite differences, and ``|x^a f'(x)|`` at the smallest grid node for
    ``f1 = x^-nu J_nu(sqrt(kappa) x)`` and ``f2 = x^-nu Y_nu(sqrt(kappa) x)``.
    The last entry is ``nan`` when ``nu`` is an integer.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    nu = 0.5 * (a - 1.0)
    k = math.sqrt(kappa)
    grid = build_grid(a, x_max, panels, order)
    x = grid.nodes

    def f1(z):
        return kappa ** (nu / 2) * bessel_g(nu, np.abs(k * z))

    d1, d2 = fd_derivatives(f1, x, x_max / grid.size, x_max)
    res = d2 + a / x * d1 + kappa * f1(x)
    residual = norm_lr(RadialFunction(grid, res), 2) / norm_lr(RadialFunction(grid, kappa * f1(x)), 2)
    x0 = x[0]
    flux1 = abs(x0**a * (-(kappa ** (nu / 2)) * k * (k * x0) * bessel_g(nu + 1.0, k * x0)))
    if float(nu).is_integer():
        flux2 = math.nan
    else:
        z0 = k * x0
        dz = -(z0**-nu) * bessel_y(nu + 1.0, z0)
        flux2 = abs(x0**a * kappa ** ((nu + 1) / 2) * dz)
    return float(residual), float(flux1), float(flux2)
