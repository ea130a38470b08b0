"""Write JSON verification reports for the three example families.

    python3 scripts/gallery_reports.py --out reports/
"""

import argparse
import os
import sys
import time
from pathlib import Path

from fitchain.gallery import verify_report

RUNS = {
    "uncountable": dict(n_grid=[2000, 20000], c_grid=[-1.0, 0.5, 1.0, 2.0],
                        param_grid=[0.25, 0.5, 0.75], k_override=4),
    "nested": dict(n_grid=[2000, 20000], c_grid=[-2.0, -0.5, 0.0, 0.5, 2.0], param_grid=[2, 3]),
    "dense": dict(n_grid=[256, 1024], c_grid=[x / 4 for x in range(-24, 25)], param_grid=[0, 1, 2, 10, 100]),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="reports")
    ap.add_argument("--only", choices=sorted(RUNS), default=None)
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, kw in RUNS.items():
        if args.only and name != args.only:
            continue
        t0 = time.perf_counter()
        report = verify_report(name, threads=args.threads, **kw)
        (out / f"{name}.json").write_text(report.to_json() + "\n")
        gaps = ", ".join(f"n={n}: {g:.2e}" for n, g in report.gap_by_n.items())
        print(f"{name:12s} max gap {report.max_gap:.2e} ({gaps})  {time.perf_counter() - t0:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
