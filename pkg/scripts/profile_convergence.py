"""Distance to stationarity of profile-fitted chains against the target profile.

Builds the chain for the logistic profile at several sizes and prints the
sup-gap over the window, in discrete time (every integer time with
|c| <= c_max) and optionally in continuous time at a few window positions.

    python3 scripts/profile_convergence.py --n 256,1024,4096
    python3 scripts/profile_convergence.py --n 256,1024 --continuous --c -2,0,2
"""

import argparse
import csv
import math
import sys
import time
import warnings

from fitchain.mixing import distance_curve
from fitchain.poissonize import ct_profile_curve
from fitchain.profiles import build_profile_chain, logistic_profile


def discrete(p, n, v_exponent, c_max, rows):
    w = math.ceil(math.sqrt(n))
    built = build_profile_chain(p, n, w, n, v_exponent=v_exponent)
    times = range(max(0, n - int(c_max * w)), n + int(c_max * w) + 1)
    curve = distance_curve(built.params, times=times, mode="root")
    gap = 0.0
    for t, d in zip(curve.times, curve.distances):
        c = (t - n) / w
        rows.append(("discrete", n, w, c, int(t), d, p(c)))
        gap = max(gap, abs(d - p(c)))
    return gap, built.params.n_states


def continuous(p, n, v_exponent, cs, tol, rows):
    w = math.ceil(n**0.6)
    pts = ct_profile_curve(p, n, w, n, cs, tol, v_exponent=v_exponent)
    for pt in pts:
        rows.append(("continuous", n, w, pt.c, pt.t, pt.distance, pt.target))
    return max(pt.gap for pt in pts)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="256,1024,4096")
    ap.add_argument("--v-exponent", type=float, default=0.5,
                    help="window half-width exponent (library default is 1/8)")
    ap.add_argument("--c-max", type=float, default=8.0)
    ap.add_argument("--continuous", action="store_true")
    ap.add_argument("--c", default="-2,0,2", help="window positions for --continuous")
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--csv", default=None, help="write every evaluated point here")
    args = ap.parse_args(argv)

    p = logistic_profile()
    sizes = [int(x) for x in args.n.split(",")]
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for n in sizes:
            t0 = time.perf_counter()
            if args.continuous:
                cs = [float(x) for x in args.c.split(",")]
                gap = continuous(p, n, args.v_exponent, cs, args.tol, rows)
                print(f"n={n:6d} continuous sup gap={gap:.3e}  {time.perf_counter() - t0:.1f}s")
            else:
                gap, states = discrete(p, n, args.v_exponent, args.c_max, rows)
                print(f"n={n:6d} states={states:8d} sup gap={gap:.3e}  {time.perf_counter() - t0:.1f}s")

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "n", "w_n", "c", "t", "d", "p"])
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
