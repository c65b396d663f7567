"""Modified Hankel transform of order ``nu`` as a dense quadrature matrix.

The transform of ``f`` is ``H f(xi) = int_0^inf f(y) G_nu(xi y) y^(2 nu + 1) dy``
with ``G_nu(z) = z^-nu J_nu(z)``.  It is unitary on ``L^2(x^a dx)``,
``a = 2 nu + 1``, and is its own inverse.  On a :class:`RadialGrid` it becomes
the matrix ``M_ij = G_nu(xi_i x_j) w_j``; the output nodes coincide with the
input nodes unless another grid is supplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .grid import RadialFunction, RadialGrid, SpaceTimeField, norm_lr
from .oscint import damped_integral, default_schedule, richardson_to_zero
from .specfun import bessel_g, bessel_j

__all__ = [
    "HankelOperator",
    "build_hankel",
    "transform",
    "plancherel_defect",
    "inversion_defect",
    "eigen_defect",
    "fd_derivatives",
    "WeberCheck",
    "verify_weber_schafheitlin",
    "weber_schafheitlin_rhs",
    "fourier_hankel",
    "kernel_rows",
]


@dataclass(frozen=True, eq=False)
class HankelOperator:
    nu: float
    in_grid: RadialGrid
    out_grid: RadialGrid
    matrix: np.ndarray

    @property
    def xi(self) -> np.ndarray:
        return self.out_grid.nodes

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Transform raw samples; a 2-D array is treated as one row per time."""
        values = np.asarray(values)
        if values.shape[-1] != self.in_grid.size:
            raise ValueError("sample length does not match the input grid")
        if np.iscomplexobj(values):
            # A real matrix times a complex array would be upcast on every call.
            re, im = np.ascontiguousarray(values.real), np.ascontiguousarray(values.imag)
            return self.apply(re) + 1j * self.apply(im)
        if values.ndim == 1:
            return self.matrix @ values
        return values @ self.matrix.T


def _check_order(nu: float, grid: RadialGrid) -> None:
    if not nu > -1.0:
        raise ValueError("order must exceed -1")
    if not math.isclose(grid.a, 2.0 * nu + 1.0, rel_tol=0.0, abs_tol=1e-12):
        raise ValueError(f"grid weight a={grid.a} does not match 2*nu+1={2 * nu + 1}")


def kernel_rows(nu: float, xi: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Rows ``G_nu(xi_i x_j) w_j`` for arbitrary target points ``xi``."""
    xi = np.asarray(xi, dtype=float)
    return bessel_g(nu, np.abs(np.multiply.outer(xi, grid.nodes))) * grid.qweights


def build_hankel(nu: float, grid: RadialGrid, out_grid: RadialGrid | None = None) -> HankelOperator:
    _check_order(nu, grid)
    if out_grid is None or out_grid is grid:
        x = grid.nodes
        iu = np.triu_indices(x.size)
        g = np.empty((x.size, x.size))
        vals = bessel_g(nu, x[iu[0]] * x[iu[1]])
        g[iu] = vals
        g[iu[1], iu[0]] = vals
        return HankelOperator(float(nu), grid, grid, g * grid.qweights)
    _check_order(nu, out_grid)
    return HankelOperator(float(nu), grid, out_grid, kernel_rows(nu, out_grid.nodes, grid))


def _on_input(op: HankelOperator, f: RadialFunction) -> None:
    if not f.grid.same_as(op.in_grid):
        raise ValueError("function does not live on the operator's input grid")


def transform(op: HankelOperator, f: RadialFunction) -> RadialFunction:
    _on_input(op, f)
    return RadialFunction(op.out_grid, op.apply(f.values))


def plancherel_defect(op: HankelOperator, f: RadialFunction) -> float:
    """Relative gap between ``||H f||`` and ``||f||`` in ``L^2_a``."""
    nf = norm_lr(f, 2)
    if nf == 0.0:
        raise ValueError("Plancherel defect is undefined for the zero function")
    return abs(norm_lr(transform(op, f), 2) - nf) / nf


def inversion_defect(op: HankelOperator, f: RadialFunction) -> float:
    """``||H(H f) - f|| / ||f||``; needs matching input and output grids."""
    if not op.out_grid.same_as(op.in_grid):
        raise ValueError("inversion defect needs output grid == input grid")
    nf = norm_lr(f, 2)
    if nf == 0.0:
        return 0.0
    twice = op.apply(op.apply(f.values))
    return norm_lr(RadialFunction(f.grid, twice - f.values), 2) / nf


def fd_derivatives(func: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float, x_max: float):
    """Fourth-order finite-difference first and second derivatives at ``x``.

    Centred five-point stencils are used where ``[x-2h, x+2h]`` lies inside
    ``[0, x_max]``; otherwise one-sided stencils pointing into the interval.
    """
    x = np.asarray(x, dtype=float)
    d1 = np.empty_like(x, dtype=complex)
    d2 = np.empty_like(x, dtype=complex)
    centre = (x - 2 * h >= 0) & (x + 2 * h <= x_max)
    xc = x[centre]
    fm2, fm1, f0, fp1, fp2 = (func(xc + k * h) for k in (-2, -1, 0, 1, 2))
    d1[centre] = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
    d2[centre] = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)
    for side in (1, -1):
        sel = ~centre & ((x - 2 * h < 0) if side == 1 else (x + 2 * h > x_max))
        if not np.any(sel):
            continue
        xs = x[sel]
        f = [func(xs + side * k * h) for k in range(6)]
        d1[sel] = side * (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
        d2[sel] = (45 * f[0] - 154 * f[1] + 214 * f[2] - 156 * f[3] + 61 * f[4] - 10 * f[5]) / (12 * h * h)
    return d1, d2


def eigen_defect(
    op: HankelOperator,
    f: RadialFunction,
    f_xx: RadialFunction | None = None,
    f_x: RadialFunction | None = None,
    *,
    func: Callable[[np.ndarray], np.ndarray] | None = None,
    h: float | None = None,
) -> float:
    """Relative ``L^2_a`` gap between ``H(f'' + (a/x) f')`` and ``-xi^2 H f``.

    Pass analytic ``f_xx`` and ``f_x`` samples, or a callable ``func`` to use
    fourth-order finite differences with step ``h`` (default ``x_max / N``).
    """
    _on_input(op, f)
    grid = op.in_grid
    x = grid.nodes
    if f_xx is not None and f_x is not None:
        d1, d2 = f_x.values, f_xx.values
    elif func is not None:
        step = h if h is not None else grid.x_max / grid.size
        d1, d2 = fd_derivatives(func, x, step, grid.x_max)
    else:
        raise ValueError("provide analytic derivatives or a callable for finite differences")
    lhs = op.apply(d2 + grid.a / x * d1)
    rhs = -(op.xi**2) * op.apply(f.values)
    scale = norm_lr(RadialFunction(op.out_grid, rhs), 2)
    if scale == 0.0:
        return 0.0
    return norm_lr(RadialFunction(op.out_grid, lhs - rhs), 2) / scale


class WeberCheck(NamedTuple):
    lhs: float
    rhs: float
    converged: bool
    error: float


def weber_schafheitlin_rhs(nu: float, x: float, y: float, t: float, kind: str = "sin") -> float:
    """Closed form of ``int_0^inf z {sin,cos}(t z^2) J_nu(yz) J_nu(xz) dz``."""
    theta = (x * x + y * y) / (4 * t) - nu * math.pi / 2
    trig = math.cos(theta) if kind == "sin" else math.sin(theta)
    return trig * bessel_j(nu, x * y / (2 * t)) / (2 * t)


def verify_weber_schafheitlin(
    nu: float,
    x: float,
    y: float,
    t: float,
    z_max: float | None = None,
    damping: float = 1e-2,
    *,
    kind: str = "sin",
    levels: int = 5,
    tol: float = 1e-5,
) -> WeberCheck:
    """Damped-quadrature value of the oscillatory Bessel-product integral versus its closed form.

    The integrand is damped by ``exp(-eps z^2)`` for ``eps`` in
    ``damping * 2**-k``, ``k < levels``, and the values are extrapolated to
    ``eps = 0``.  ``z_max`` optionally caps the integration range.
    """
    if kind not in ("sin", "cos"):
        raise ValueError("kind must be 'sin' or 'cos'")
    lower = -2.0 if kind == "sin" else -1.0
    if not nu > lower:
        raise ValueError(f"order must exceed {lower} for the {kind} integral")
    if t <= 0:
        raise ValueError("t must be positive")
    if x < 0 or y < 0:
        raise ValueError("x and y must be non-negative")
    power = 2 * nu + 1
    if kind == "cos":
        trig = lambda z: np.cos(t * z * z)
    elif power > -0.5:
        trig = lambda z: np.sin(t * z * z)
    else:
        # Move z^2 from the sine into the power so it stays above -1.
        trig = lambda z: t * np.sinc(t * z * z / math.pi)
        power += 2.0

    # z J_nu(yz) J_nu(xz) = z^(2 nu + 1) (xy)^nu G_nu(yz) G_nu(xz): smooth apart from the power.
    def integrand(z):
        return (x * y) ** nu * trig(z) * bessel_g(nu, y * z) * bessel_g(nu, x * z)

    schedule = default_schedule(damping, levels)
    vals = [
        damped_integral(integrand, e, lambda Z: 2 * t * Z + x + y, z_max, origin_power=power)
        for e in schedule
    ]
    ext = richardson_to_zero(schedule, vals, tol)
    return WeberCheck(float(np.real(ext.value)), weber_schafheitlin_rhs(nu, x, y, t, kind), ext.converged, ext.error)


def fourier_hankel(
    F: SpaceTimeField,
    nu: float,
    targets: Sequence[tuple[float, float]],
    op: HankelOperator | None = None,
) -> np.ndarray:
    """``sum_k tau_k exp(-2 pi i tau t_k) H(F(., t_k))(xi)`` at each target ``(xi, tau)``."""
    _check_order(nu, F.grid)
    tg = np.asarray(targets, dtype=float).reshape(-1, 2)
    xi, tau = tg[:, 0], tg[:, 1]
    idx = np.clip(np.searchsorted(op.xi, xi), 0, op.xi.size - 1) if op is not None else None
    if op is not None and op.in_grid.same_as(F.grid) and np.array_equal(op.xi[idx], xi):
        rows = op.matrix[idx]
    else:
        uniq, inv = np.unique(xi, return_inverse=True)
        rows = kernel_rows(nu, uniq, F.grid)[inv]
    hat = F.values @ rows.T  # (M, K): H(F(., t_k))(xi_j)
    phase = np.exp(-2j * np.pi * np.multiply.outer(F.times.nodes, tau))  # (M, K)
    return np.einsum("k,kj,kj->j", F.times.qweights, phase, hat)
