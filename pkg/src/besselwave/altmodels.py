"""Two half-line models equivalent to the Bessel operator after a change of variables.

Kimura: ``y = x^2/4`` sends ``B_a`` to ``L_b = y d^2/dy^2 + b d/dy`` with
``b = (a+1)/2``, and the weighted flux ``x^a u_x`` to ``2^(2b-1) y^b v_y``.

Inverse square: ``u = x^(-a/2) v`` sends ``B_a`` to the Hardy operator
``H_l = d^2/dx^2 - l(l+1)/x^2`` with ``l = -a/2`` and is unitary from
``L^2(dx)`` onto ``L^2(x^a dx)``.  The group kernels are then related by
``H_l(x, y, t) = (xy)^(a/2) S_a(x, y, t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .estimates import DecayFit, EvolutionProbe, _loglog_fit
from .grid import RadialFunction, RadialGrid, build_grid
from .hankel import fd_derivatives
from .propagator import kernel_eval
from .specfun import bessel_j

__all__ = [
    "KimuraMap",
    "kimura_transfer",
    "kimura_operator_residual",
    "kimura_flux_residual",
    "InverseSquareSpec",
    "inverse_square_kernel",
    "inverse_square_closed_form",
    "kernel_bridge_defect",
    "hardy_map_residual",
    "hardy_norm_defect",
    "hardy_evolve",
    "inverse_square_dispersive_check",
    "inverse_square_decay_fit",
]


# --- Kimura ------------------------------------------------------------------


@dataclass(frozen=True)
class KimuraMap:
    a: float

    def __post_init__(self):
        if not self.a > -1:
            raise ValueError("a must exceed -1")

    @property
    def b(self) -> float:
        return 0.5 * (self.a + 1.0)

    def image_grid(self, grid: RadialGrid) -> RadialGrid:
        """Nodes ``x^2/4`` with weights for ``y^(b-1) dy``, since ``x^a dx = 2^a y^(b-1) dy``."""
        if not math.isclose(grid.a, self.a, abs_tol=1e-12):
            raise ValueError("grid weight does not match a")
        return RadialGrid(
            self.b - 1.0,
            grid.nodes**2 / 4.0,
            grid.qweights / 2.0**self.a,
            grid.x_max**2 / 4.0,
            grid.panels,
            grid.order,
            grid.refine,
        )


def kimura_transfer(kmap: KimuraMap, u: RadialFunction) -> RadialFunction:
    """``v(y) = u(2 sqrt(y))`` on the image grid ``y_j = x_j^2 / 4``."""
    return RadialFunction(kmap.image_grid(u.grid), u.values)


def kimura_operator_residual(
    kmap: KimuraMap,
    u: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    h: float = 1e-3,
    v: Callable[[np.ndarray], np.ndarray] | None = None,
) -> float:
    """Max relative gap between ``B_a u(x)`` and ``L_b v(y)`` at ``y = x^2/4``, both by finite differences.

    ``v`` defaults to ``y -> u(2 sqrt(y))``.  Points must be positive.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("points must be positive")
    v = v if v is not None else (lambda y: u(2.0 * np.sqrt(np.abs(y))))
    y = x * x / 4.0
    span = float(x.max()) + 4 * h
    d1, d2 = fd_derivatives(u, x, h, span)
    lhs = d2 + kmap.a / x * d1
    e1, e2 = fd_derivatives(v, y, h, float(y.max()) + 4 * h)
    rhs = y * e2 + kmap.b * e1
    scale = np.abs(lhs).max()
    return float(np.abs(lhs - rhs).max() / scale) if scale > 0 else float(np.abs(rhs).max())


def kimura_flux_residual(
    kmap: KimuraMap,
    du: Callable[[np.ndarray], np.ndarray],
    dv: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
) -> float:
    """Max relative gap between ``x^a u'(x)`` and ``2^(2b-1) y^b v'(y)`` at ``y = x^2/4``."""
    x = np.asarray(x, dtype=float)
    y = x * x / 4.0
    lhs = x**kmap.a * du(x)
    rhs = 2.0 ** (2 * kmap.b - 1) * y**kmap.b * dv(y)
    scale = np.abs(lhs).max()
    return float(np.abs(lhs - rhs).max() / scale) if scale > 0 else float(np.abs(rhs).max())


# --- inverse-square potential ---------------------------------------------------


@dataclass(frozen=True)
class InverseSquareSpec:
    """Hardy operator with ``l = -a/2``, the branch tied to the Neumann problem for ``B_a``."""

    a: float

    def __post_init__(self):
        if not self.a > -1:
            raise ValueError("a must exceed -1")

    @property
    def ell(self) -> float:
        return -0.5 * self.a

    @classmethod
    def from_ell(cls, ell: float) -> "InverseSquareSpec":
        return cls(-2.0 * ell)

    @property
    def has_closed_form(self) -> bool:
        return -0.5 < self.ell < 0.5


def inverse_square_kernel(spec: InverseSquareSpec, x, y, t: float):
    """``(xy)^(a/2) S_a(x, y, t)``."""
    if t == 0:
        raise ValueError("the kernel is singular at t = 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (x * y) ** (spec.a / 2) * kernel_eval(spec.a, x, y, t)


def inverse_square_closed_form(ell: float, x, y, t: float):
    """``e^(i pi (l - 1/2)/2) / (2t) (xy)^(1/2) J_(-l-1/2)(xy/2t) e^(i(x^2+y^2)/4t)`` for ``t > 0``.

    Negative ``t`` takes the complex conjugate.  Valid for ``-1/2 < l < 1/2``.
    """
    if not -0.5 < ell < 0.5:
        raise ValueError("the closed form needs -1/2 < l < 1/2")
    if t == 0:
        raise ValueError("the kernel is singular at t = 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = abs(t)
    z = x * y / (2 * s)
    val = (
        np.exp(0.5j * math.pi * (ell - 0.5))
        / (2 * s)
        * np.sqrt(x * y)
        * bessel_j(-ell - 0.5, z)
        * np.exp(1j * (x * x + y * y) / (4 * s))
    )
    return val if t > 0 else np.conj(val)


def kernel_bridge_defect(spec: InverseSquareSpec, x, y, t: float) -> float:
    """Max relative gap between the two kernel formulas at the given points."""
    k1 = inverse_square_kernel(spec, x, y, t)
    k2 = inverse_square_closed_form(spec.ell, x, y, t)
    return float(np.max(np.abs(k1 - k2) / np.abs(k2)))


def hardy_map_residual(
    a: float,
    v: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    v_xx: Callable[[np.ndarray], np.ndarray] | None = None,
    h: float = 1e-3,
) -> float:
    """Relative max gap in ``x^(a/2) B_a u = v'' - (a/2)(a/2 - 1) v / x^2`` with ``u = x^(-a/2) v``.

    The left side is differenced from ``u``; the right side uses ``v_xx`` if
    given, else the same finite-difference stencil applied to ``v``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x - 2 * h <= 0):
        raise ValueError("points must keep the stencil away from the origin")

    def u(z):
        return z ** (-a / 2) * v(z)

    span = float(x.max()) + 4 * h
    d1, d2 = fd_derivatives(u, x, h, span)
    lhs = x ** (a / 2) * (d2 + a / x * d1)
    vxx = v_xx(x) if v_xx is not None else fd_derivatives(v, x, h, span)[1]
    rhs = vxx - (a / 2) * (a / 2 - 1) * v(x) / (x * x)
    scale = np.abs(rhs).max()
    return float(np.abs(lhs - rhs).max() / scale) if scale > 0 else float(np.abs(lhs).max())


def hardy_norm_defect(
    a: float,
    v: Callable[[np.ndarray], np.ndarray],
    x_max: float = 12.0,
    panels: int = 80,
    order: int = 24,
) -> float:
    """Relative gap between ``||x^(-a/2) v||_{L^2(x^a dx)}`` and ``||v||_{L^2(dx)}``.

    The left side uses the weighted grid, so ``x^(-a/2) v`` should be smooth;
    the right side is adaptive quadrature on ``[0, x_max]``.  ``v`` must be
    negligible beyond ``x_max``.
    """
    ga = build_grid(a, x_max, panels, order)
    lhs = math.sqrt(float(ga.qweights @ np.abs(ga.nodes ** (-a / 2) * v(ga.nodes)) ** 2))
    sq = integrate.quad(lambda z: abs(v(np.array(z))) ** 2, 0.0, x_max, limit=400, epsabs=0.0, epsrel=1e-13)[0]
    rhs = math.sqrt(sq)
    return abs(lhs - rhs) / rhs


def _check_phi(spec: InverseSquareSpec, phi: RadialFunction) -> None:
    if not math.isclose(phi.grid.a, spec.a, abs_tol=1e-12):
        raise ValueError("datum grid weight does not match a = -2 l")


def hardy_evolve(spec: InverseSquareSpec, phi: RadialFunction, t: float, x: np.ndarray) -> np.ndarray:
    """``e^(itH_l) psi`` at ``x`` for ``psi = x^(a/2) phi``, i.e. ``x^(a/2) (S_a(t) phi)(x)``."""
    _check_phi(spec, phi)
    probe = EvolutionProbe(phi)
    x = np.asarray(x, dtype=float)
    ev = probe.evolve(t)
    return x ** (spec.a / 2) * probe.pointwise(t, x, ev.route)


def _dn_weight(spec: InverseSquareSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Weight on ``S_a(t) phi`` giving ``|e^(itH) psi| min(1, x^l)`` for ``l > 0``, else ``|e^(itH) psi|``."""
    ell = spec.ell

    def w(z):
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore"):
            base = z ** (-ell)
            return np.minimum(1.0, base) if ell > 0 else base

    return w


def inverse_square_dispersive_check(ell: float, phi: RadialFunction, t_set: Sequence[float]) -> tuple[float, ...]:
    """Ratios ``||e^(itH) psi||_{L^inf(dn)} / ((t^(l-1/2) + t^(-1/2)) ||psi||_{L^1(dm)})``, ``0 < l < 1/2``.

    ``psi = x^(-l) phi`` with ``phi`` sampled on the ``a = -2l`` grid, and
    ``dn = min(1, x^l) dx``, ``dm = max(1, x^-l) dx``.
    """
    if not 0 < ell < 0.5:
        raise ValueError("the weighted estimate is for 0 < l < 1/2")
    spec = InverseSquareSpec.from_ell(ell)
    _check_phi(spec, phi)
    x = phi.grid.nodes
    psi = x**-ell * np.abs(phi.values)
    # dx = x^-a (x^a dx)
    l1 = float(phi.grid.qweights @ (psi * np.maximum(1.0, x**-ell) * x ** (-spec.a)))
    probe = EvolutionProbe(phi)
    w = _dn_weight(spec)
    return tuple(probe.sup(t, w) / ((t ** (ell - 0.5) + t**-0.5) * l1) for t in t_set)


def inverse_square_decay_fit(ell: float, phi: RadialFunction, t_set: Sequence[float]) -> DecayFit:
    """Log-log slope of ``||e^(itH) psi||_{L^inf(dn)}`` (plain sup when ``l <= 0``); expected ``-1/2``."""
    if not -0.5 < ell < 0.5:
        raise ValueError("need -1/2 < l < 1/2")
    spec = InverseSquareSpec.from_ell(ell)
    _check_phi(spec, phi)
    probe = EvolutionProbe(phi)
    w = _dn_weight(spec)
    t = np.asarray(t_set, dtype=float)
    return _loglog_fit(t, np.array([probe.sup(tk, w) for tk in t]))
