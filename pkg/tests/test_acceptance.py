"""Full acceptance battery: one test per criterion, run at its stated tolerances.

Each test prints a single PASS/FAIL line, and the lines are repeated in the
terminal summary.  The battery itself lives in :mod:`besselwave.checks`, so
``besselwave suite`` reproduces exactly these numbers.
"""

import time

import pytest

from besselwave import checks

from conftest import ACCEPTANCE_LINES

CRITERIA = [
    ("special functions", "specfun"),
    ("hankel calculus", "hankel"),
    ("weber-schafheitlin integrals", "weber"),
    ("propagator structure", "propagator"),
    ("mass identity", "mass"),
    ("classical limit", "classical"),
    ("dispersive decay", "dispersive"),
    ("strichartz diagnostics", "strichartz"),
    ("restriction routes", "restriction"),
    ("nonlinear evolution", "nls"),
    ("comparison models", "altmodels"),
]


def _describe(c: checks.Check) -> str:
    params = ", ".join(f"{k}={getattr(c, k):.4g}" for k in ("a", "nu", "r", "t") if getattr(c, k) == getattr(c, k))
    return f"{c.group}:{c.name} ({params}) value={c.value:.3e} bound={c.bound:.3e} {c.note}".rstrip()


@pytest.mark.parametrize("title,group", CRITERIA, ids=[g for _, g in CRITERIA])
def test_criterion(title, group):
    t0 = time.perf_counter()
    results = checks.run_group(group, seed=0)
    elapsed = time.perf_counter() - t0
    failed = [c for c in results if not c.passed]
    status = "PASS" if not failed else "FAIL"
    line = f"{status} {title}: {len(results) - len(failed)}/{len(results)} checks in {elapsed:.1f}s"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert results, "the group produced no checks"
    assert not failed, "\n".join(_describe(c) for c in failed)
