"""Critical and subcritical nonlinear runs: Picard contraction, solver agreement, mass and empirical small-data budget."""

import argparse

import numpy as np

from besselwave import nls
from besselwave.grid import RadialFunction, TestFunction, build_grid, norm_lr


def unit_gaussian(grid, sigma=1.0):
    f = TestFunction.gaussian(sigma).on(grid)
    return RadialFunction(grid, f.values / norm_lr(f, 2))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--amplitudes", type=float, nargs="+", default=[0.05, 0.2, 0.5, 1.0])
    ap.add_argument("--budget", action="store_true", help="also bisect for the empirical small-data budget")
    args = ap.parse_args(argv)
    grid = build_grid(1.0, 20.0, 60, 24)
    u = unit_gaussian(grid)
    print(f"{'amplitude':>9} {'iters':>5} {'contraction':>11} {'picard-vs-step':>14} {'mass drift':>10}")
    for m in args.amplitudes:
        prob = nls.NLSProblem(1.0, 1j, 3.0, RadialFunction(grid, m * u.values), 1.0)
        pic = nls.picard_solve(prob)
        st = nls.step_solve(prob, 1e-3)
        idx = np.searchsorted(st.solution.times.nodes, pic.solution.times.nodes)
        gap = np.sqrt(np.abs(st.solution.values[idx] - pic.solution.values) ** 2 @ grid.qweights).max()
        mass = np.asarray(st.mass_trace)
        print(f"{m:9g} {pic.iterations:5d} {pic.observed_contraction:11.3e} {gap:14.3e} {np.abs(mass / mass[0] - 1).max():10.2e}")
    if args.budget:
        b = nls.small_data_budget(1.0, 3.0, 1j, u)
        print(f"empirical budget (contraction <= {b.target}): {b.value:.4g} after {b.evaluations} solves")
    wide = build_grid(1.0, 40.0, 80, 24)
    sub = nls.NLSProblem(1.0, 1j, 2.0, RadialFunction(wide, 0.3 * unit_gaussian(wide, 3.0).values), 5.0)
    glob = nls.globalize(sub, 1.0)
    print("subcritical hand-off mass gaps:", " ".join("%.1e" % abs(m / glob.handoff_mass[0] - 1) for m in glob.handoff_mass))


if __name__ == "__main__":
    main()
