"""Gamma and Bessel-family functions on the positive real axis.

Everything here is vectorised over the argument ``z`` with a scalar order
``nu``.  ``bessel_j`` sums the ascending power series (with Neumaier
compensation) below ``z_switch = max(12, |nu|)`` and uses the Hankel
asymptotic expansion with its P/Q correction series above it (reached by
upward recurrence from low orders when ``|nu| > 4``).  The
regularised kernel ``bessel_g(nu, z) = z**-nu * J_nu(z)`` is evaluated with
the ``z**nu`` prefactor cancelled, so it is finite at ``z = 0``.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "gamma",
    "rgamma",
    "bessel_j",
    "bessel_jp",
    "bessel_g",
    "bessel_y",
    "bessel_yp",
    "hankel_h",
    "z_switch",
]

# Lanczos coefficients, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_SERIES_TOL = 1e-18
_MAX_SERIES_TERMS = 400
_MAX_ASYMPTOTIC_TERMS = 80
# Above this order the Hankel expansion at z ~ 12 loses accuracy, so large-z
# values are built by upward recurrence from orders in [0, 2).
_DIRECT_ASYMPTOTIC_MAX_ORDER = 4.0


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def _gamma_scalar(x: float) -> float:
    if x < 0.5:
        # Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x).
        return math.pi / (math.sin(math.pi * x) * _gamma_scalar(1.0 - x))
    x -= 1.0
    acc = _LANCZOS[0]
    for k in range(1, len(_LANCZOS)):
        acc += _LANCZOS[k] / (x + k)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def gamma(x: float) -> float:
    """Gamma function for real ``x`` (Lanczos approximation plus reflection).

    Raises
    ------
    ValueError
        At the poles ``x = 0, -1, -2, ...``.
    """
    x = float(x)
    if _is_nonpositive_integer(x):
        raise ValueError(f"gamma has a pole at x = {x:g}")
    if x > 171.7:
        return math.inf
    return _gamma_scalar(x)


def rgamma(x: float) -> float:
    """Reciprocal gamma, equal to zero at the poles."""
    x = float(x)
    if _is_nonpositive_integer(x):
        return 0.0
    if x > 171.7:
        return 0.0
    return 1.0 / _gamma_scalar(x)


def z_switch(nu: float) -> float:
    """Argument above which the series is no longer used."""
    return max(12.0, abs(nu))


def _as_argument(z, *, strict: bool = False) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    bad = (z <= 0) if strict else (z < 0)
    if np.any(bad) or np.any(np.isnan(z)):
        bound = "> 0" if strict else ">= 0"
        raise ValueError(f"argument must be {bound}")
    return z


def _series_g(nu: float, z: np.ndarray) -> np.ndarray:
    """sum_k (-z^2/4)^k / (k! Gamma(nu+k+1)) * 2^-nu, with compensated summation."""
    q = -0.25 * z * z
    term = np.full(z.shape, rgamma(nu + 1.0))
    if term.size == 0:
        return term
    s = term.copy()
    c = np.zeros_like(s)
    k = 0
    # With nu + 1 a non-positive integer the leading terms vanish; start the
    # recursion from the first non-zero coefficient instead.
    if term.flat[0] == 0.0:
        k0 = int(round(-(nu + 1.0))) + 1
        term = q**k0 / (math.factorial(k0) * _gamma_scalar(nu + k0 + 1.0))
        s = term.copy()
        k = k0
    while k < _MAX_SERIES_TERMS:
        term = term * q / ((k + 1) * (k + nu + 1.0))
        k += 1
        t = s + term
        c += np.where(np.abs(s) >= np.abs(term), (s - t) + term, (term - t) + s)
        s = t
        if np.all(np.abs(term) <= _SERIES_TOL * np.maximum(np.abs(s), 1e-300)):
            break
    return (s + c) * 2.0**-nu


def _asymptotic_pq(nu: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """P and Q correction series of the Hankel expansion, truncated at the smallest term."""
    mu = 4.0 * nu * nu
    p = np.ones_like(z)
    q = np.zeros_like(z)
    idx = np.arange(z.size)
    zi = z.ravel()
    term = np.ones_like(zi)
    prev = np.full(zi.shape, np.inf)
    pf, qf = p.ravel(), q.ravel()
    for k in range(1, _MAX_ASYMPTOTIC_TERMS):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * zi)
        mag = np.abs(term)
        keep = mag < prev
        if not np.all(keep):
            idx, zi, term, mag = idx[keep], zi[keep], term[keep], mag[keep]
        if idx.size == 0:
            break
        # a_k / z^k enters P (k even) or Q (k odd) with sign (-1)^(k//2).
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            qf[idx] += sign * term
        else:
            pf[idx] += sign * term
        live = mag >= 1e-17
        idx, zi, term, prev = idx[live], zi[live], term[live], mag[live]
        if idx.size == 0:
            break
    return p, q


def _hankel_expansion(nu: float, z: np.ndarray) -> np.ndarray:
    p, q = _asymptotic_pq(nu, z)
    w = z - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * z)) * (p * np.cos(w) - q * np.sin(w))


def _asymptotic_j(nu: float, z: np.ndarray) -> np.ndarray:
    """Large-z branch; requires z >= max(12, |nu|)."""
    if abs(nu) <= _DIRECT_ASYMPTOTIC_MAX_ORDER:
        return _hankel_expansion(nu, z)
    # Forward recurrence J_{m+1} = (2m/z) J_m - J_{m-1} is stable for m < z.
    base = nu - math.floor(nu)
    lo = _hankel_expansion(base, z)
    hi = _hankel_expansion(base + 1.0, z)
    if nu < 0:
        # Downward: J_{m-1} = (2m/z) J_m - J_{m+1}, equally harmless for |m| < z.
        cur, nxt, m = lo, hi, base
        while m > nu + 0.5:
            cur, nxt = (2.0 * m / z) * cur - nxt, cur
            m -= 1.0
        return cur
    m = base + 1.0
    while m < nu - 0.5:
        lo, hi = hi, (2.0 * m / z) * hi - lo
        m += 1.0
    return hi


def _j_nonneg_order_or_fractional(nu: float, z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    small = z < z_switch(nu)
    if np.any(small):
        zs = z[small]
        with np.errstate(divide="ignore", invalid="ignore"):
            pref = np.where(zs > 0, zs**nu, 1.0 if nu == 0 else (0.0 if nu > 0 else np.inf))
        out[small] = pref * _series_g(nu, zs)
    if np.any(~small):
        out[~small] = _asymptotic_j(nu, z[~small])
    return out


def bessel_j(nu: float, z):
    """Bessel function of the first kind ``J_nu(z)`` for ``z >= 0``.

    Negative integer orders use ``J_{-n} = (-1)^n J_n``.  For negative
    non-integer orders ``J_nu`` is singular at ``z = 0`` and returns ``inf``
    there.
    """
    nu = float(nu)
    z = _as_argument(z)
    scalar = z.ndim == 0
    z1 = np.atleast_1d(z)
    if nu < 0 and nu.is_integer():
        n = int(-nu)
        out = (-1.0) ** n * _j_nonneg_order_or_fractional(float(n), z1)
    else:
        out = _j_nonneg_order_or_fractional(nu, z1)
    return float(out[0]) if scalar else out


def bessel_g(nu: float, z):
    """Regularised kernel ``z**-nu * J_nu(z)``, finite at ``z = 0``.

    ``bessel_g(nu, 0) == 1 / (2**nu * gamma(nu + 1))``.  Its derivative is
    ``-z * bessel_g(nu + 1, z)``.
    """
    nu = float(nu)
    z = _as_argument(z)
    scalar = z.ndim == 0
    z1 = np.atleast_1d(z)
    out = np.empty_like(z1)
    small = z1 < z_switch(nu)
    if np.any(small):
        if nu < 0 and nu.is_integer():
            n = -nu
            zs = z1[small]
            out[small] = (-1.0) ** n * zs ** (2 * n) * _series_g(n, zs)
        else:
            out[small] = _series_g(nu, z1[small])
    if np.any(~small):
        zl = z1[~small]
        out[~small] = zl**-nu * _asymptotic_j(nu, zl)
    return float(out[0]) if scalar else out


def bessel_jp(nu: float, z):
    """Derivative ``J_nu'(z) = J_{nu-1}(z) - (nu/z) J_nu(z)`` for ``z > 0``."""
    z = _as_argument(z, strict=True)
    return bessel_j(nu - 1.0, z) - nu / z * bessel_j(nu, z)


def _require_fractional(nu: float) -> float:
    nu = float(nu)
    if nu.is_integer():
        raise ValueError("integer order is not supported for the second kind")
    return nu


def bessel_y(nu: float, z):
    """Second-kind function ``(J_nu cos(nu pi) - J_{-nu}) / sin(nu pi)``, non-integer ``nu``."""
    nu = _require_fractional(nu)
    z = _as_argument(z, strict=True)
    s, c = math.sin(nu * math.pi), math.cos(nu * math.pi)
    return (bessel_j(nu, z) * c - bessel_j(-nu, z)) / s


def bessel_yp(nu: float, z):
    """Derivative ``Y_nu'(z) = Y_{nu-1}(z) - (nu/z) Y_nu(z)``."""
    nu = _require_fractional(nu)
    z = _as_argument(z, strict=True)
    return bessel_y(nu - 1.0, z) - nu / z * bessel_y(nu, z)


def hankel_h(kind: int, nu: float, z):
    """Third-kind function ``J_nu(z) + i Y_nu(z)`` (kind 1) or ``J_nu(z) - i Y_nu(z)`` (kind 2)."""
    if kind not in (1, 2):
        raise ValueError("kind must be 1 or 2")
    sign = 1.0 if kind == 1 else -1.0
    return bessel_j(nu, z) + sign * 1j * bessel_y(nu, z)
