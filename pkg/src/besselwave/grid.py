"""Discretisation of the weighted half-line and of the time axis.

A :class:`RadialGrid` is a composite Gauss rule on ``[0, x_max]`` whose weights
absorb the density ``x**a``.  Interior panels use Gauss-Legendre nodes times
``x_j**a``; the panel touching the origin uses Gauss-Jacobi nodes so that the
``x**a`` factor is integrated exactly there.  For ``a < 0`` the first uniform
panel is further split geometrically toward the origin.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .specfun import bessel_g

__all__ = [
    "RadialGrid",
    "RadialFunction",
    "TimeGrid",
    "SpaceTimeField",
    "TestFunction",
    "build_grid",
    "norm_lr",
    "mixed_norm",
    "sum_intersection_norms",
    "write_radial_csv",
    "read_radial_csv",
    "write_field_csv",
    "read_field_csv",
]

DEFAULT_PANELS = 80
DEFAULT_ORDER = 24
DEFAULT_X_MAX = 12.0


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Quadrature for integrals ``int_0^x_max f(x) x**a dx``."""

    a: float
    nodes: np.ndarray
    qweights: np.ndarray
    x_max: float
    panels: int
    order: int
    refine: int = 0

    def __post_init__(self):
        if self.nodes.shape != self.qweights.shape:
            raise ValueError("nodes and qweights must have equal length")
        self.nodes.setflags(write=False)
        self.qweights.setflags(write=False)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def nu(self) -> float:
        return 0.5 * (self.a - 1.0)

    def integrate(self, values) -> complex | float:
        return np.dot(self.qweights, values)

    def header(self) -> dict:
        return {
            "a": self.a,
            "x_max": self.x_max,
            "panels": self.panels,
            "order": self.order,
            "refine": self.refine,
            "N": self.size,
        }

    def same_as(self, other: "RadialGrid") -> bool:
        return (
            self is other
            or (
                self.a == other.a
                and self.size == other.size
                and np.array_equal(self.nodes, other.nodes)
                and np.array_equal(self.qweights, other.qweights)
            )
        )


def _panel_edges(x_max: float, panels: int, refine: int) -> np.ndarray:
    edges = np.linspace(0.0, x_max, panels + 1)
    if refine > 0:
        h = edges[1]
        inner = h * 0.25 ** np.arange(refine, 0, -1)
        edges = np.concatenate(([0.0], inner, edges[1:]))
    return edges


def build_grid(
    a: float,
    x_max: float = DEFAULT_X_MAX,
    panels: int = DEFAULT_PANELS,
    order: int = DEFAULT_ORDER,
    refine: int | None = None,
) -> RadialGrid:
    """Composite Gauss grid for the measure ``x**a dx`` on ``[0, x_max]``.

    ``refine`` extra geometric sub-panels (ratio 1/4) are inserted inside the
    first uniform panel; by default 4 when ``a < 0`` and none otherwise.
    """
    if not a > -1.0:
        raise ValueError("weight exponent a must exceed -1")
    if not x_max > 0.0:
        raise ValueError("x_max must be positive")
    if panels < 1 or order < 2:
        raise ValueError("need panels >= 1 and order >= 2")
    if refine is None:
        refine = 4 if a < 0 else 0
    edges = _panel_edges(float(x_max), int(panels), int(refine))
    s, w = np.polynomial.legendre.leggauss(order)
    sj, wj = roots_jacobi(order, 0.0, a)
    nodes, weights = [], []
    for k, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        half = 0.5 * (hi - lo)
        if k == 0:
            # Exact for x**a * polynomial on [0, hi].
            nodes.append(half * (1.0 + sj))
            weights.append(wj * half ** (a + 1.0))
        else:
            x = lo + half * (1.0 + s)
            nodes.append(x)
            weights.append(w * half * x**a)
    return RadialGrid(
        a=float(a),
        nodes=np.concatenate(nodes),
        qweights=np.concatenate(weights),
        x_max=float(x_max),
        panels=int(panels),
        order=int(order),
        refine=int(refine),
    )


@dataclass(frozen=True, eq=False)
class RadialFunction:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.nodes.shape:
            raise ValueError("values must align with grid nodes")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: RadialGrid, f: Callable[[np.ndarray], np.ndarray]) -> "RadialFunction":
        return cls(grid, f(grid.nodes))

    def __mul__(self, c) -> "RadialFunction":
        return RadialFunction(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing time nodes with composite-trapezoid weights."""

    nodes: np.ndarray
    qweights: np.ndarray = field(default=None)

    def __post_init__(self):
        t = np.asarray(self.nodes, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ValueError("time nodes must be a non-empty 1-D sequence")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("time nodes must be strictly increasing")
        object.__setattr__(self, "nodes", t)
        if self.qweights is None:
            object.__setattr__(self, "qweights", trapezoid_weights(t))

    @property
    def size(self) -> int:
        return self.nodes.size

    @classmethod
    def uniform(cls, t0: float, t1: float, n: int) -> "TimeGrid":
        return cls(np.linspace(t0, t1, n))

    @classmethod
    def hybrid(cls, T: float, t_lin: float = 1.0, dt: float = 0.02, growth: float = 1.03) -> "TimeGrid":
        """Symmetric grid on ``[-T, T]``: uniform through 0, geometric beyond ``t_lin``."""
        if T <= 0:
            raise ValueError("T must be positive")
        t_lin = min(t_lin, T)
        n_lin = max(2, int(math.ceil(t_lin / dt)))
        lin = np.linspace(0.0, t_lin, n_lin + 1)
        if T > t_lin:
            # Nodes t_lin * growth^k below T, then T itself: a shorter window's
            # nodes are a prefix of a longer one's, so evaluations can be shared.
            n_geo = int(math.floor(math.log(T / t_lin) / math.log(growth) - 1e-9))
            geo = t_lin * growth ** np.arange(1, n_geo + 1)
            geo = geo[geo < T * (1 - 1e-9)]
            half = np.concatenate((lin, geo, [T]))
        else:
            half = lin
        return cls(np.concatenate((-half[:0:-1], half)))


def trapezoid_weights(t: np.ndarray) -> np.ndarray:
    if t.size == 1:
        return np.zeros(1)
    d = np.diff(t)
    w = np.zeros_like(t)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    grid: RadialGrid
    times: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.times.size, self.grid.size):
            raise ValueError(f"values must have shape (M, N) = ({self.times.size}, {self.grid.size})")
        object.__setattr__(self, "values", vals)

    def at(self, k: int) -> RadialFunction:
        return RadialFunction(self.grid, self.values[k])


def _lr(values: np.ndarray, weights: np.ndarray, r: float) -> np.ndarray:
    mag = np.abs(values)
    if math.isinf(r):
        return mag.max(axis=-1)
    if r < 1:
        raise ValueError("r must be >= 1")
    return (mag**r @ weights) ** (1.0 / r)


def norm_lr(f: RadialFunction, r: float) -> float:
    """Weighted Lebesgue norm ``(sum_j w_j |f_j|^r)^(1/r)``; max-norm for ``r = inf``."""
    return float(_lr(f.values, f.grid.qweights, r))


def _time_norm(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    if math.isinf(q):
        return float(values.max()) if values.size else 0.0
    if q < 1:
        raise ValueError("q must be >= 1")
    return float((weights @ values**q) ** (1.0 / q))


def mixed_norm(u: SpaceTimeField, q: float, r: float) -> float:
    """``L^q_t L^r_a`` norm: trapezoid in time of the spatial ``L^r_a`` norms."""
    inner = _lr(u.values, u.grid.qweights, r)
    return _time_norm(inner, u.times.qweights, q)


def sum_intersection_norms(u: SpaceTimeField, q1: float, q2: float, r: float) -> tuple[float, float]:
    """Return ``(intersection_norm, sum_norm_upper_bound)`` for ``L^q1 + L^q2`` in time.

    The intersection norm is exact.  The sum-space norm is bounded above by
    splitting ``u`` at ``|t| = 1`` and measuring each piece in one of the two
    exponents, taking the cheaper assignment.
    """
    if q1 == q2:
        raise ValueError("q1 and q2 must differ")
    inner = _lr(u.values, u.grid.qweights, r)
    w = u.times.qweights
    both = mixed_norm(u, q1, r) + mixed_norm(u, q2, r)
    near = np.abs(u.times.nodes) <= 1.0
    pieces = {}
    for q in (q1, q2):
        pieces[q] = (
            _time_norm(np.where(near, inner, 0.0), w, q),
            _time_norm(np.where(near, 0.0, inner), w, q),
        )
    upper = min(pieces[q1][0] + pieces[q2][1], pieces[q2][0] + pieces[q1][1])
    return both, upper


@dataclass(frozen=True)
class TestFunction:
    """Smooth radial test datum with analytic first and second derivatives.

    ``gaussian``: ``exp(-x^2 / (2 sigma^2))``.
    ``gaussian_poly``: ``sum_k c_k x^(2k) * exp(-x^2 / (2 sigma^2))``.
    ``hankel_bandlimited``: ``G_mu(b x) / G_mu(0)`` with ``mu = nu + m + 1``;
    its order-``nu`` Hankel transform is a multiple of
    ``(1 - xi^2/b^2)_+^m``, supported in ``[0, b]``.  It decays like
    ``x^-(mu + 1/2)``, so ``m`` controls the truncation error.
    """

    kind: str = "gaussian"
    sigma: float = 1.0
    coeffs: tuple[float, ...] = (1.0,)
    band: float = 6.0
    smoothness: int = 8
    nu: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "gaussian_poly", "hankel_bandlimited"):
            raise ValueError(f"unknown test-function kind {self.kind!r}")
        if self.sigma <= 0 or self.band <= 0:
            raise ValueError("sigma and band must be positive")
        if self.kind == "hankel_bandlimited" and self.nu <= -1:
            raise ValueError("band-limited member needs nu > -1")

    @classmethod
    def gaussian(cls, sigma: float = 1.0, amplitude: float = 1.0) -> "TestFunction":
        return cls("gaussian", sigma=sigma, amplitude=amplitude)

    @classmethod
    def gaussian_poly(cls, coeffs: Sequence[float], sigma: float = 1.0, amplitude: float = 1.0) -> "TestFunction":
        return cls("gaussian_poly", sigma=sigma, coeffs=tuple(float(c) for c in coeffs), amplitude=amplitude)

    @classmethod
    def hankel_bandlimited(cls, nu: float, band: float = 6.0, smoothness: int = 8, amplitude: float = 1.0) -> "TestFunction":
        return cls("hankel_bandlimited", band=band, smoothness=smoothness, nu=nu, amplitude=amplitude)

    def with_amplitude(self, amplitude: float) -> "TestFunction":
        return TestFunction(self.kind, self.sigma, self.coeffs, self.band, self.smoothness, self.nu, amplitude)

    # polynomial part P(x^2) and its x-derivatives, for the Gaussian kinds
    def _poly(self, x):
        c = self.coeffs if self.kind == "gaussian_poly" else (1.0,)
        y = x * x
        p = sum(ck * y**k for k, ck in enumerate(c))
        dp = sum(2 * k * ck * x ** (2 * k - 1) for k, ck in enumerate(c) if k >= 1)
        d2p = sum(2 * k * (2 * k - 1) * ck * x ** (2 * k - 2) for k, ck in enumerate(c) if k >= 1)
        return p, dp + 0 * x, d2p + 0 * x

    def _band_mu(self) -> float:
        return self.nu + self.smoothness + 1.0

    def _band_scale(self) -> float:
        return self.amplitude / bessel_g(self._band_mu(), 0.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "hankel_bandlimited":
            return self._band_scale() * bessel_g(self._band_mu(), np.abs(self.band * x))
        p, _, _ = self._poly(x)
        return self.amplitude * p * np.exp(-x * x / (2 * self.sigma**2))

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "hankel_bandlimited":
            b, mu = self.band, self._band_mu()
            return -self._band_scale() * b * b * x * bessel_g(mu + 1.0, np.abs(b * x))
        p, dp, _ = self._poly(x)
        s2 = self.sigma**2
        return self.amplitude * (dp - x / s2 * p) * np.exp(-x * x / (2 * s2))

    def d2(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "hankel_bandlimited":
            b, mu = self.band, self._band_mu()
            bx = np.abs(b * x)
            return self._band_scale() * (-b * b * bessel_g(mu + 1.0, bx) + b**4 * x * x * bessel_g(mu + 2.0, bx))
        p, dp, d2p = self._poly(x)
        s2 = self.sigma**2
        return self.amplitude * (d2p - 2 * x / s2 * dp + (x * x / s2**2 - 1 / s2) * p) * np.exp(-x * x / (2 * s2))

    def bessel_op(self, a: float, x):
        """``f'' + (a/x) f'`` evaluated from the analytic derivatives (x > 0)."""
        x = np.asarray(x, dtype=float)
        return self.d2(x) + a / x * self.d1(x)

    def hankel_transform(self, nu: float, xi):
        """Closed-form order-``nu`` transform where one is available."""
        xi = np.asarray(xi, dtype=float)
        if self.kind == "gaussian":
            s2 = self.sigma**2
            return self.amplitude * s2 ** (nu + 1.0) * np.exp(-s2 * xi * xi / 2)
        if self.kind == "hankel_bandlimited" and nu == self.nu:
            m, b = self.smoothness, self.band
            c = self._band_scale() / (2.0**m * math.factorial(m) * b ** (2 * nu + 2))
            return c * np.clip(1.0 - (xi / b) ** 2, 0.0, None) ** m
        raise NotImplementedError(f"no closed-form transform for {self.kind} at nu={nu}")

    def on(self, grid: RadialGrid) -> RadialFunction:
        return RadialFunction(grid, self(grid.nodes))


# --- CSV serialisation -------------------------------------------------------


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_text(path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _read_header(lines: list[str]) -> tuple[dict, list[str]]:
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing JSON header line")
    return json.loads(lines[0][1:]), lines[1:]


def write_radial_csv(f: RadialFunction, path: str | Path) -> None:
    head = f.grid.header()
    buf = io.StringIO()
    buf.write("# " + json.dumps(head, sort_keys=True) + "\n")
    buf.write("x,re,im\n")
    for x, v in zip(f.grid.nodes, f.values):
        buf.write(f"{_fmt(x)},{_fmt(v.real)},{_fmt(v.imag)}\n")
    _write_text(path, buf.getvalue())


def _grid_from_header(head: dict) -> RadialGrid:
    return build_grid(head["a"], head["x_max"], head["panels"], head["order"], head.get("refine"))


def read_radial_csv(path: str | Path) -> RadialFunction:
    lines = Path(path).read_text().splitlines()
    head, rest = _read_header(lines)
    grid = _grid_from_header(head)
    data = np.loadtxt(rest[1:], delimiter=",", ndmin=2)
    if data.shape[0] != grid.size or not np.allclose(data[:, 0], grid.nodes, rtol=1e-14, atol=0):
        raise ValueError("CSV nodes do not match the grid described by its header")
    return RadialFunction(grid, data[:, 1] + 1j * data[:, 2])


def write_field_csv(u: SpaceTimeField, path: str | Path) -> None:
    head = dict(u.grid.header(), M=u.times.size)
    buf = io.StringIO()
    buf.write("# " + json.dumps(head, sort_keys=True) + "\n")
    buf.write("t,x,re,im\n")
    for k, t in enumerate(u.times.nodes):
        for x, v in zip(u.grid.nodes, u.values[k]):
            buf.write(f"{_fmt(t)},{_fmt(x)},{_fmt(v.real)},{_fmt(v.imag)}\n")
    _write_text(path, buf.getvalue())


def read_field_csv(path: str | Path) -> SpaceTimeField:
    lines = Path(path).read_text().splitlines()
    head, rest = _read_header(lines)
    grid = _grid_from_header(head)
    data = np.loadtxt(rest[1:], delimiter=",", ndmin=2)
    m, n = head["M"], grid.size
    if data.shape[0] != m * n:
        raise ValueError("row count does not match header (M, N)")
    t = data[::n, 0]
    vals = (data[:, 2] + 1j * data[:, 3]).reshape(m, n)
    return SpaceTimeField(grid, TimeGrid(t), vals)
