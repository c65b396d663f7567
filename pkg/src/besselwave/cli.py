"""Command-line experiment driver.

Each subcommand validates its parameters, runs, and writes CSV tables plus a
``manifest.json`` into ``--out``.  Parameters come from built-in defaults,
then an optional ``--config`` file (INI-style ``key = value`` or JSON), then
command-line flags.  Exit status: 0 on success, 1 when ``--assert`` is set
and a check fails, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from . import altmodels as alt
from . import checks
from . import estimates as est
from . import nls
from .grid import (
    RadialFunction,
    SpaceTimeField,
    TestFunction,
    TimeGrid,
    build_grid,
    norm_lr,
    read_radial_csv,
    write_field_csv,
    write_radial_csv,
)
from .hankel import build_hankel, inversion_defect, plancherel_defect, transform
from .propagator import PropagatorSpec, apply_propagator

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


# --- parameter schema ---------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    kind: Callable[[str], Any]
    default: Any
    check: Callable[[Any], str | None] = lambda v: None
    help: str = ""


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _gt(lo):
    return lambda v: None if v > lo else f"must exceed {lo:g}"


def _all(pred, msg):
    return lambda vs: None if vs and all(pred(v) for v in vs) else msg


def _choice(*opts):
    return lambda v: None if v in opts else f"must be one of {', '.join(opts)}"


def _positive_int(v):
    return None if v >= 1 else "must be a positive integer"


_GRID = {
    "x_max": Param(float, 12.0, _gt(0), "truncation radius"),
    "panels": Param(int, 80, _positive_int, "quadrature panels"),
    "order": Param(int, 24, lambda v: None if v >= 2 else "must be at least 2", "Gauss points per panel"),
}
_FAMILY = {
    "family": Param(str, "gaussian", _choice("gaussian", "gaussian_poly", "hankel_bandlimited")),
    "sigma": Param(float, 1.0, _gt(0), "Gaussian width"),
    "coeffs": Param(_floats, (1.0, 0.5, 0.1), help="even-polynomial coefficients in x^2"),
    "band": Param(float, 6.0, _gt(0), "band edge of the band-limited member"),
    "input": Param(str, "", help="RadialFunction CSV; overrides the family"),
}
_A = {"a": Param(float, 0.0, _gt(-1), "weight exponent")}

SCHEMA: dict[str, dict[str, Param]] = {
    "specfun-check": {},
    "transform": {**_A, **_GRID, **_FAMILY},
    "hankel-check": {"weber_points": Param(int, 20, _positive_int)},
    "propagate": {
        **_A,
        **_GRID,
        **_FAMILY,
        "t": Param(_floats, (0.5, 1.0), _all(math.isfinite, "must be finite numbers")),
        "method": Param(str, "spectral", _choice("spectral", "kernel")),
    },
    "kernel-check": {},
    "dispersive": {
        **_A,
        **_FAMILY,
        "x_max": Param(float, 0.0, lambda v: None if v >= 0 else "must be non-negative", "0 picks a size from sigma"),
        "panels": Param(int, 40, _positive_int),
        "order": Param(int, 24, lambda v: None if v >= 2 else "must be at least 2"),
        "sigma": Param(float, 0.1, _gt(0)),
        "t_min": Param(float, 0.1, _gt(0)),
        "t_max": Param(float, 100.0, _gt(0)),
        "n_t": Param(int, 13, lambda v: None if v >= 3 else "must be at least 3"),
        "r": Param(_floats, (4.0, 6.0), _all(lambda v: v > 2, "each r must exceed 2")),
    },
    "strichartz": {
        "a": Param(_floats, (0.0, 1.0), _all(lambda v: v > -1, "each a must exceed -1")),
        "lam": Param(_floats, (0.25, 1.0, 4.0), _all(lambda v: v > 0, "each lambda must be positive")),
        "window": Param(float, 20.0, _gt(0), "base window T; doubled once for the convergence check"),
        "scale_window": Param(float, 160.0, _gt(0), "window for the rescaling comparison"),
        "panels": Param(int, 40, _positive_int),
        "q_inf": Param(float, 0.0, lambda v: None if v >= 0 else "must be non-negative", "a < 0 only; 0 takes the equality case"),
    },
    "restriction": {
        "a": Param(float, 1.0, lambda v: None if v >= 0 else "must be non-negative"),
        "lam": Param(_floats, (0.5, 1.0, 2.0), _all(lambda v: v > 0, "each lambda must be positive")),
        "x_max": Param(float, 30.0, _gt(0)),
        "panels": Param(int, 100, _positive_int),
        "order": Param(int, 24, lambda v: None if v >= 2 else "must be at least 2"),
        "n_times": Param(int, 81, lambda v: None if v >= 3 else "must be at least 3"),
    },
    "nls": {
        "a": Param(float, 1.0, lambda v: None if v >= 0 else "solver needs a >= 0"),
        "p": Param(float, 3.0, _gt(1)),
        "mu_re": Param(float, 0.0),
        "mu_im": Param(float, 1.0),
        "amplitude": Param(float, 0.05, lambda v: None if v >= 0 else "must be non-negative", "L^2_a norm of the datum"),
        "family": Param(str, "gaussian", _choice("gaussian", "gaussian_poly")),
        "sigma": Param(float, 1.0, _gt(0)),
        "T": Param(float, 1.0, _gt(0)),
        "dt": Param(float, 1e-3, _gt(0)),
        "method": Param(str, "picard", _choice("picard", "stepper")),
        "x_max": Param(float, 20.0, _gt(0)),
        "panels": Param(int, 60, _positive_int),
        "order": Param(int, 24, lambda v: None if v >= 2 else "must be at least 2"),
        "dump_solution": Param(lambda v: str(v).lower() in ("1", "true", "yes"), False),
        "allow_supercritical": Param(lambda v: str(v).lower() in ("1", "true", "yes"), False),
    },
    "compare-models": {
        "which": Param(str, "kimura", _choice("kimura", "inverse-square")),
        "a": Param(float, 0.5, _gt(-1)),
    },
    "suite": {
        "only": Param(lambda v: tuple(s.strip() for s in str(v).split(",") if s.strip()), tuple(checks.GROUPS)),
    },
}


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    out_dir: Path = Path("out")
    seed: int = 0
    workers: int = 1
    assert_checks: bool = False


def _coerce(sub: str, key: str, value) -> Any:
    spec = SCHEMA[sub].get(key)
    if spec is None:
        raise ConfigError(f"field '{key}': unknown parameter for {sub}")
    try:
        out = spec.kind(value) if not isinstance(value, bool) or spec.kind is not float else float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"field '{key}': cannot parse {value!r}") from None
    msg = spec.check(out)
    if msg:
        raise ConfigError(f"field '{key}': {msg} (got {value!r})")
    return out


def read_config_file(path: str | Path) -> dict:
    """Flat ``key = value`` text (sections optional) or a JSON object."""
    text = Path(path).read_text()
    if str(path).endswith(".json") or text.lstrip().startswith("{"):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigError("JSON config must be an object")
        return {str(k).replace("-", "_"): v for k, v in data.items()}
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if not text.lstrip().startswith("["):
        text = "[besselwave]\n" + text
    parser.read_string(text)
    out = {}
    for section in parser.sections():
        for k, v in parser[section].items():
            out[k.replace("-", "_")] = v
    return out


def resolve(sub: str, file_values: dict, flag_values: dict) -> dict:
    """Defaults, overridden by the config file, overridden by flags; every value validated."""
    params = {k: p.default for k, p in SCHEMA[sub].items()}
    reserved = {"seed", "workers", "out", "assert"}
    for source in (file_values, flag_values):
        for k, v in source.items():
            if v is None or k in reserved:
                continue
            params[k] = _coerce(sub, k, v)
    if sub == "dispersive" and params["t_max"] <= params["t_min"]:
        raise ConfigError("field 't_max': must exceed t_min")
    if sub == "suite":
        bad = [g for g in params["only"] if g not in checks.GROUPS]
        if bad:
            raise ConfigError(f"field 'only': unknown group(s) {', '.join(bad)}")
    return params


# --- output helpers -------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_table(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    with open(path, "w", newline="\n") as fh:
        fh.write(buf.getvalue())


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, Path):
        return str(v)
    return v


_CHECK_HEADER = ["group", "check", "a", "nu", "q", "r", "z", "t_or_lambda", "value", "bound", "pass", "note"]


def _check_rows(rows: list[checks.Check]) -> list[list]:
    return [[c.group, c.name, c.a, c.nu, c.q, c.r, c.z, c.t, c.value, c.bound, c.passed, c.note] for c in rows]


@dataclass
class Outcome:
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    extra_files: list = field(default_factory=list)


# --- subcommands ---------------------------------------------------------------------


def _datum(params: dict, grid) -> RadialFunction:
    if params.get("input"):
        f = read_radial_csv(params["input"])
        if not f.grid.same_as(grid):
            raise ConfigError("field 'input': CSV grid does not match the requested grid")
        return f
    fam = params["family"]
    if fam == "gaussian":
        tf = TestFunction.gaussian(params["sigma"])
    elif fam == "gaussian_poly":
        tf = TestFunction.gaussian_poly(params["coeffs"], params["sigma"])
    else:
        tf = TestFunction.hankel_bandlimited(grid.nu, params["band"])
    return tf.on(grid)


def _grid_for(params: dict, a: float):
    if params.get("input"):
        return read_radial_csv(params["input"]).grid
    return build_grid(a, params["x_max"], params["panels"], params["order"])


def cmd_specfun(cfg: RunConfig) -> Outcome:
    rows = checks.special_functions(seed=cfg.seed)
    table = [[c.name, c.nu, c.z, c.value, c.bound, c.passed] for c in rows]
    return Outcome(rows, {"specfun.csv": (["check", "nu", "z", "residual", "bound", "pass"], table)})


def cmd_transform(cfg: RunConfig) -> Outcome:
    p = cfg.params
    grid = _grid_for(p, p["a"])
    f = _datum(p, grid)
    op = build_hankel(grid.nu, grid)
    out = Outcome()
    path = cfg.out_dir / "transform.csv"
    write_radial_csv(transform(op, f), path)
    out.extra_files.append(path.name)
    if np.any(f.values):
        out.summary = {"plancherel_defect": plancherel_defect(op, f), "double_transform_defect": inversion_defect(op, f)}
    return out


def cmd_hankel_check(cfg: RunConfig) -> Outcome:
    rows = checks.hankel_calculus() + checks.weber_schafheitlin(seed=cfg.seed, n=cfg.params["weber_points"])
    return Outcome(rows, {"hankel_check.csv": (_CHECK_HEADER, _check_rows(rows))})


def cmd_propagate(cfg: RunConfig) -> Outcome:
    p = cfg.params
    grid = _grid_for(p, p["a"])
    spec = PropagatorSpec.on_grid(grid, method=p["method"])
    phi = _datum(p, grid)
    times = np.unique(np.asarray(p["t"], dtype=float))
    vals = np.vstack([apply_propagator(spec, float(t), phi).values for t in times])
    path = cfg.out_dir / "propagate.csv"
    write_field_csv(SpaceTimeField(grid, TimeGrid(times), vals), path)
    n0 = norm_lr(phi, 2)
    summary = {}
    if n0 > 0:
        defects = [abs(norm_lr(RadialFunction(grid, v), 2) / n0 - 1) for v in vals]
        summary = {"norm_defect": dict(zip((f"{t:.17g}" for t in times), defects))}
    return Outcome(summary=summary, extra_files=[path.name])


def cmd_kernel_check(cfg: RunConfig) -> Outcome:
    rows = checks.propagator_structure(seed=cfg.seed) + checks.mass_identity() + checks.classical_limit()
    return Outcome(rows, {"kernel_check.csv": (_CHECK_HEADER, _check_rows(rows))})


_EST_HEADER = ["quantity", "a", "q", "r", "t_or_lambda", "value"]


def cmd_dispersive(cfg: RunConfig) -> Outcome:
    p = cfg.params
    a = p["a"]
    x_max = p["x_max"] or 12.0 * p["sigma"]
    if p["input"]:
        grid = read_radial_csv(p["input"]).grid
    else:
        grid = build_grid(a, x_max, p["panels"], p["order"])
    phi = _datum(p, grid)
    t_set = np.geomspace(p["t_min"], p["t_max"], p["n_t"])
    rows, out = [], Outcome()
    nan = math.nan
    if a >= 0:
        for r in (math.inf,) + tuple(p["r"]):
            fit = est.dispersive_decay_fit(a, phi, t_set, r=r)
            name = "sup_norm" if math.isinf(r) else "lr_norm"
            rows += [[name, a, nan, r, t, v] for t, v in zip(fit.times, fit.values)]
            rows.append(["slope", a, nan, r, nan, fit.slope])
            target = -(a + 1) / 2 if math.isinf(r) else -(a + 1) * (0.5 - 1 / r)
            out.checks.append(checks.within("dispersive", "slope", fit.slope, target, 0.03, a=a, r=r))
            out.summary[f"slope_r={r:g}"] = fit.slope
    else:
        r = p["r"][0]
        tab = est.weighted_dispersive_check(a, phi, t_set, r=r)
        for t, s, l, u in zip(tab.times, tab.sup_ratios, tab.lr_ratios, tab.unweighted):
            rows += [["weighted_sup_ratio", a, nan, math.inf, t, s], ["weighted_lr_ratio", a, nan, r, t, l], ["unweighted_ratio", a, nan, math.inf, t, u]]
        out.summary = {"sup_of_sup_ratio": tab.sup_of_sup_ratio, "sup_of_lr_ratio": tab.sup_of_lr_ratio}
        out.checks.append(checks.upper("dispersive", "weighted_sup_ratio_max", tab.sup_of_sup_ratio, 1.0, a=a))
    out.tables["dispersive.csv"] = (_EST_HEADER, rows)
    return out


def cmd_strichartz(cfg: RunConfig) -> Outcome:
    p = cfg.params
    T, T2, Ts = p["window"], 2 * p["window"], p["scale_window"]
    rows, out = [], Outcome()
    for a in p["a"]:
        if a < 0:
            r = est.diagonal_r(a)
            grid = build_grid(a, 12.0, p["panels"], 24)
            try:
                upper, both, d = est.weighted_strichartz_bounds(a, r, TestFunction.gaussian(1.0).on(grid), T, p["q_inf"] or None)
            except ValueError as exc:
                raise ConfigError(f"field 'q_inf': {exc}") from None
            rows += [["weighted_sum_upper", a, p["q_inf"] or math.nan, r, T, upper / d], ["weighted_intersection", a, p["q_inf"] or math.nan, r, T, both / d]]
            continue
        pair = est.AdmissiblePair.diagonal(a)
        ratios = {}
        for lam in p["lam"]:
            grid = build_grid(a, 12.0 / lam, p["panels"], 24)
            spec = PropagatorSpec.on_grid(grid)
            phi = TestFunction.gaussian(1.0 / lam).on(grid)
            for res in est.strichartz_ratios(spec, pair, phi, sorted({T, T2, Ts} if lam == 1.0 else {Ts})):
                W = res.window
                ratios[lam, W] = res.ratio
                rows.append([f"ratio_T={W:g}", a, pair.q, pair.r, lam, res.ratio])
                rows.append([f"tail_fraction_T={W:g}", a, pair.q, pair.r, lam, res.tail_fraction])
        kw = dict(a=a, q=pair.q, r=pair.r)
        if (1.0, T) in ratios:
            d = abs(ratios[1.0, T2] / ratios[1.0, T] - 1)
            out.checks.append(checks.upper("strichartz", "window_doubling", d, 0.02, t=T2, **kw))
            out.summary[f"window_delta_a={a:g}"] = d
            for lam in p["lam"]:
                if lam != 1.0:
                    d = abs(ratios[lam, Ts] / ratios[1.0, Ts] - 1)
                    out.checks.append(checks.upper("strichartz", "rescaling", d, 0.02, t=lam, **kw))
    out.tables["strichartz.csv"] = (_EST_HEADER, rows)
    return out


def cmd_restriction(cfg: RunConfig) -> Outcome:
    p = cfg.params
    a = p["a"]
    rows, out, ratio = [], Outcome(), {}
    pair = est.AdmissiblePair.diagonal(a)
    for lam in p["lam"]:
        grid = build_grid(a, p["x_max"] / lam, p["panels"], p["order"])
        spec = PropagatorSpec.on_grid(grid)
        times = TimeGrid.uniform(-1 / lam**2, 1 / lam**2, p["n_times"])
        F = SpaceTimeField(grid, times, np.outer(checks.bump(lam**2 * times.nodes), np.exp(-((lam * grid.nodes) ** 2) / 2)))
        lhs, rhs, defect = est.restriction_consistency(spec, F, pair)
        ratio[lam] = lhs / rhs
        rows += [[name, a, pair.q_dual, pair.r_dual, lam, v] for name, v in (("lhs", lhs), ("source_norm", rhs), ("route_defect", defect))]
        out.checks.append(checks.upper("restriction", "route_defect", defect, 1e-5, a=a, t=lam))
    if 1.0 in ratio:
        for lam in ratio:
            if lam != 1.0:
                out.checks.append(checks.upper("restriction", "scaling_ratio_change", abs(ratio[lam] / ratio[1.0] - 1), 0.02, a=a, t=lam))
    out.tables["restriction.csv"] = (_EST_HEADER, rows)
    return out


def cmd_nls(cfg: RunConfig) -> Outcome:
    p = cfg.params
    grid = build_grid(p["a"], p["x_max"], p["panels"], p["order"])
    tf = TestFunction.gaussian(p["sigma"]) if p["family"] == "gaussian" else TestFunction.gaussian_poly((1.0, 0.5, 0.1), p["sigma"])
    f = tf.on(grid)
    phi = RadialFunction(grid, f.values * p["amplitude"] / norm_lr(f, 2))
    mu = complex(p["mu_re"], p["mu_im"])
    prob = nls.NLSProblem(p["a"], mu, p["p"], phi, p["T"])
    if prob.regime == "supercritical" and not p["allow_supercritical"]:
        raise ConfigError("field 'p': supercritical exponent refused (set allow_supercritical)")
    if p["method"] == "picard":
        rep = nls.picard_solve(prob, allow_supercritical=p["allow_supercritical"])
        bound = 1e-4
    else:
        rep = nls.step_solve(prob, p["dt"], allow_supercritical=p["allow_supercritical"])
        bound = 1e-6
    m = np.asarray(rep.mass_trace)
    drift = float(np.abs(m / m[0] - 1).max()) if m[0] > 0 else 0.0
    report = {
        "regime": prob.regime,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "diverged": rep.diverged,
        "contraction_factors": list(rep.contraction_factors),
        "observed_contraction": rep.observed_contraction,
        "fixed_point_residual": rep.fixed_point_residual,
        "mass_trace": list(rep.mass_trace),
        "mass_drift": drift,
        "pair_norms": {f"q={pr.q:.17g},r={pr.r:.17g}": v for pr, v in rep.pair_norms.items()},
    }
    out = Outcome(summary={k: report[k] for k in ("regime", "iterations", "converged", "mass_drift")})
    path = cfg.out_dir / "report.json"
    path.write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n")
    out.extra_files.append(path.name)
    if p["dump_solution"]:
        sp = cfg.out_dir / "solution.csv"
        write_field_csv(rep.solution, sp)
        out.extra_files.append(sp.name)
    if mu.real == 0:
        out.checks.append(checks.upper("nls", f"mass_drift:{p['method']}", drift, bound, a=p["a"]))
    else:
        out.summary["mass_drift_note"] = "Re mu != 0: drift reported, not asserted"
    if p["method"] == "picard":
        out.checks.append(checks.Check("nls", "picard_converged", float(rep.iterations), 60.0, bool(rep.converged), a=p["a"]))
    return out


def cmd_compare(cfg: RunConfig) -> Outcome:
    p = cfg.params
    a = p["a"]
    rng = np.random.default_rng(cfg.seed)
    out = Outcome()
    g = "altmodels"
    if p["which"] == "kimura":
        km = alt.KimuraMap(a)
        xs = np.linspace(0.05, 5.0, 60)
        du = lambda x: -x * np.exp(-x * x / 2)
        dv = lambda y: -2 * np.exp(-2 * y)
        out.checks.append(checks.upper(g, "kimura_flux", alt.kimura_flux_residual(km, du, dv, xs), 1e-6, a=a))
        u = lambda x: np.exp(-x * x / 2)
        out.checks.append(checks.upper(g, "kimura_operator", alt.kimura_operator_residual(km, u, xs), 1e-3, a=a))
    else:
        spec = alt.InverseSquareSpec(a)
        if spec.has_closed_form:
            x, y = rng.uniform(0.05, 6.0, (2, 50))
            t = float(rng.uniform(0.2, 3.0))
            out.checks.append(checks.upper(g, "kernel_bridge", alt.kernel_bridge_defect(spec, x, y, t), 1e-10, a=a, t=t))
        v = lambda x: x ** (a / 2) * np.exp(-x * x / 2)
        out.checks.append(checks.upper(g, "hardy_norm", alt.hardy_norm_defect(a, v), 1e-10, a=a))
        out.checks.append(checks.upper(g, "hardy_identity", alt.hardy_map_residual(a, v, np.linspace(0.2, 5.0, 40)), 1e-3, a=a))
        if 0 < spec.ell < 0.5:
            grid = build_grid(a)
            ratios = alt.inverse_square_dispersive_check(spec.ell, TestFunction.gaussian(1.0).on(grid), np.geomspace(0.01, 100.0, 17))
            out.checks.append(checks.upper(g, "inverse_square_ratio_max", max(ratios), 1.0, a=a))
    out.tables["compare_models.csv"] = (_CHECK_HEADER, _check_rows(out.checks))
    return out


def _suite_job(args):
    name, seed = args
    return checks.run_group(name, seed=seed)


def cmd_suite(cfg: RunConfig) -> Outcome:
    groups = list(cfg.params["only"])
    jobs = [(g, cfg.seed) for g in groups]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(jobs))) as pool:
            results = list(pool.map(_suite_job, jobs))
    else:
        results = [_suite_job(j) for j in jobs]
    rows = [c for res in results for c in res]
    summary = {g: {"checks": len(res), "failed": sum(not c.passed for c in res)} for g, res in zip(groups, results)}
    return Outcome(rows, {"suite.csv": (_CHECK_HEADER, _check_rows(rows))}, summary)


COMMANDS: dict[str, Callable[[RunConfig], Outcome]] = {
    "specfun-check": cmd_specfun,
    "transform": cmd_transform,
    "hankel-check": cmd_hankel_check,
    "propagate": cmd_propagate,
    "kernel-check": cmd_kernel_check,
    "dispersive": cmd_dispersive,
    "strichartz": cmd_strichartz,
    "restriction": cmd_restriction,
    "nls": cmd_nls,
    "compare-models": cmd_compare,
    "suite": cmd_suite,
}


def run(cfg: RunConfig) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    outcome = COMMANDS[cfg.subcommand](cfg)
    files = list(outcome.extra_files)
    for name, (header, rows) in outcome.tables.items():
        write_table(cfg.out_dir / name, header, rows)
        files.append(name)
    failed = [f"{c.group}:{c.name}" for c in outcome.checks if not c.passed]
    manifest = {
        "subcommand": cfg.subcommand,
        "version": __version__,
        "config": {**cfg.params, "seed": cfg.seed, "workers": cfg.workers, "assert": cfg.assert_checks},
        "artifacts": sorted(files),
        "checks": {"total": len(outcome.checks), "failed": len(failed), "failures": failed},
        "summary": outcome.summary,
    }
    (cfg.out_dir / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    for c in outcome.checks:
        if not c.passed:
            print(f"FAIL {c.group}:{c.name} value={c.value:.3e} bound={c.bound:.3e}", file=sys.stderr)
    print(f"{cfg.subcommand}: {len(outcome.checks) - len(failed)}/{len(outcome.checks)} checks passed; artifacts in {cfg.out_dir}")
    return EXIT_FAIL if cfg.assert_checks and failed else EXIT_OK


# --- argument parsing ------------------------------------------------------------------


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI-style or JSON parameter file")
    common.add_argument("--out", default=None, help="output directory (default: out/<subcommand>)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--assert", dest="assert_checks", action="store_true", help="exit 1 if any check fails")
    parser = argparse.ArgumentParser(prog="besselwave", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, schema in SCHEMA.items():
        sp = sub.add_parser(name, parents=[common])
        for key, prm in schema.items():
            sp.add_argument(_flag(key), dest=key, default=None, help=prm.help or None)
    return parser


def _workers(requested: int | None) -> int:
    n = requested if requested is not None else 1
    cap = os.environ.get("BESSELWAVE_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"BESSELWAVE_THREADS must be an integer, got {cap!r}") from None
    if n < 1:
        raise ConfigError("field 'workers': must be a positive integer")
    return n


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    sub = ns.subcommand
    file_values = read_config_file(ns.config) if ns.config else {}
    flags = {k: getattr(ns, k) for k in SCHEMA[sub]}
    params = resolve(sub, file_values, flags)
    seed = ns.seed if ns.seed is not None else int(file_values.get("seed", 0))
    workers = _workers(ns.workers if ns.workers is not None else (int(file_values["workers"]) if "workers" in file_values else None))
    out = Path(ns.out or file_values.get("out") or Path("out") / sub)
    return RunConfig(sub, params, out, seed, workers, bool(ns.assert_checks))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except (ConfigError, OSError, configparser.Error, json.JSONDecodeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
