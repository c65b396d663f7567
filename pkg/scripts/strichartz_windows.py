"""Homogeneous Strichartz ratio for the diagonal pair as the time window grows and the datum is rescaled."""

import argparse

from besselwave import estimates as est
from besselwave.grid import TestFunction, build_grid
from besselwave.propagator import PropagatorSpec


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, nargs="+", default=[0.0, 1.0])
    ap.add_argument("--windows", type=float, nargs="+", default=[10.0, 20.0, 40.0, 80.0, 160.0])
    ap.add_argument("--lam", type=float, nargs="+", default=[0.25, 1.0, 4.0])
    args = ap.parse_args(argv)
    print(f"{'a':>4} {'lambda':>7} {'T':>7} {'ratio':>10} {'tail':>9}")
    for a in args.a:
        pair = est.AdmissiblePair.diagonal(a)
        for lam in args.lam:
            grid = build_grid(a, 12.0 / lam, 40, 24)
            phi = TestFunction.gaussian(1.0 / lam).on(grid)
            for res in est.strichartz_ratios(PropagatorSpec.on_grid(grid), pair, phi, args.windows):
                print(f"{a:4g} {lam:7g} {res.window:7g} {res.ratio:10.6f} {res.tail_fraction:9.2e}")


if __name__ == "__main__":
    main()
