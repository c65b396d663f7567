"""Gaussian-damped oscillatory integrals on the half-line and their limit as the damping vanishes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

__all__ = ["Extrapolation", "richardson_to_zero", "panel_integral", "damped_integral", "default_schedule"]

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def default_schedule(eps0: float = 1e-2, levels: int = 4) -> tuple[float, ...]:
    """Geometric damping sequence ``eps0, eps0/2, eps0/4, ...``."""
    return tuple(eps0 * 0.5**k for k in range(levels))


@dataclass(frozen=True)
class Extrapolation:
    value: complex
    error: float
    converged: bool
    samples: tuple[complex, ...]


def richardson_to_zero(eps: Sequence[float], values: Sequence[complex], tol: float = 1e-6) -> Extrapolation:
    """Polynomial (Neville) extrapolation of ``values(eps)`` to ``eps = 0``.

    The error estimate is the gap between the extrapolants that use all points
    and all but the first; ``converged`` compares it with ``tol`` relative to
    ``max(1, |value|)``.
    """
    e = np.asarray(eps, dtype=float)
    v = np.asarray(values, dtype=complex)
    if e.size != v.size or e.size == 0:
        raise ValueError("need matching, non-empty eps and values")

    def neville(ee, vv):
        p = vv.copy()
        n = ee.size
        for m in range(1, n):
            for i in range(n - m):
                p[i] = (ee[i + m] * p[i] - ee[i] * p[i + 1]) / (ee[i + m] - ee[i])
        return p[0]

    best = neville(e, v)
    err = abs(best - neville(e[1:], v[1:])) if e.size > 1 else math.inf
    ok = err <= tol * max(1.0, abs(best))
    val = best.real if np.isrealobj(values) else best
    return Extrapolation(val, float(err), bool(ok), tuple(v.tolist()))


def panel_integral(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, n_panels: int, order: int = 24):
    """Composite Gauss-Legendre rule with ``n_panels`` equal panels on ``[lo, hi]``."""
    s, w = _gauss_legendre(order)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    x = (edges[:-1, None] + half[:, None] * (1.0 + s[None, :])).ravel()
    wx = (half[:, None] * w[None, :]).ravel()
    return np.dot(wx, f(x))


def damped_integral(
    f: Callable[[np.ndarray], np.ndarray],
    eps: float,
    phase_rate: Callable[[float], float],
    z_max: float | None = None,
    order: int = 24,
    rad_per_panel: float = 6.0,
    chunk: int = 400_000,
    origin_power: float = 0.0,
):
    """``int_0^Z z^p f(z) exp(-eps z^2) dz`` with ``Z`` where the damping falls below 1e-17.

    ``phase_rate(z)`` bounds the local angular frequency of ``f`` on ``[0, z]``
    and sets the panel width.  ``p = origin_power > -1`` allows an integrable
    power singularity at the origin, handled by Gauss-Jacobi on the first panel.
    """
    if eps <= 0 and z_max is None:
        raise ValueError("undamped integral needs a finite z_max")
    z_cut = math.sqrt(39.2 / eps) if eps > 0 else math.inf
    Z = min(z_cut, z_max) if z_max is not None else z_cut
    rate = max(phase_rate(Z), 1.0)
    n_panels = max(4, int(math.ceil(Z * rate / rad_per_panel)))

    def h(z):
        return f(z) * np.exp(-eps * z * z) if eps > 0 else f(z)

    def g(z):
        return z**origin_power * h(z)

    edges = np.linspace(0.0, Z, n_panels + 1)
    sj, wj = roots_jacobi(order, 0.0, origin_power)
    half = 0.5 * edges[1]
    total = np.dot(wj * half ** (origin_power + 1.0), h(half * (1.0 + sj)))
    # Split very large rules into chunks to bound memory.
    per = max(1, chunk // order)
    for k in range(1, n_panels, per):
        lo, hi = edges[k], edges[min(k + per, n_panels)]
        total = total + panel_integral(g, lo, hi, min(per, n_panels - k), order)
    return total
