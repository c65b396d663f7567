"""Fitted sup-norm and L^r decay exponents against their predicted values, over a range of weights."""

import argparse
import csv
import math
import sys

import numpy as np

from besselwave import estimates as est
from besselwave.grid import TestFunction, build_grid


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0, 3.0])
    ap.add_argument("--r", type=float, nargs="+", default=[4.0, 6.0])
    ap.add_argument("--sigma", type=float, default=0.1)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)
    t = np.geomspace(0.1, 100.0, 13)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["a", "r", "slope", "predicted", "rel_error", "fit_residual"])
    for a in args.a:
        # r must stay below 2(a+1)/(a-1) for a > 1
        rs = [math.inf] + [r for r in args.r if a <= 1 or r < 2 * (a + 1) / (a - 1)]
        phi = TestFunction.gaussian(args.sigma).on(build_grid(a, 12 * args.sigma, 40, 24))
        for r in rs:
            fit = est.dispersive_decay_fit(a, phi, t, r=r)
            pred = -(a + 1) / 2 if math.isinf(r) else -(a + 1) * (0.5 - 1 / r)
            w.writerow([a, r, "%.6f" % fit.slope, "%.6f" % pred, "%.2e" % abs(fit.slope / pred - 1), "%.2e" % fit.residual])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
