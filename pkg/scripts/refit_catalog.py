#!/usr/bin/env python3
"""Exercise the curve fitter against every catalog class: sample each
class's utility curve on a grid, refit (a, b) from the samples alone, and
print the recovered parameters next to the truth.

Usage:
    python scripts/refit_catalog.py [n_samples] [p_max_w]

Defaults: 50 samples on [0, 30] W.
"""

import sys

import numpy as np

from powerbid import ALL_CQIS, FitSample, catalog_entry, fit_sigmoid, utility_for_cqi


def main() -> int:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 50
    p_max = float(sys.argv[2]) if len(sys.argv) > 2 else 30.0
    grid = np.linspace(0.0, p_max, n)

    header = (f"{'cqi':>3}  {'true a':>9}  {'fit a':>9}  {'true b':>9}  "
              f"{'fit b':>9}  {'|da|':>8}  {'|db|':>8}  {'sse':>9}  {'iters':>5}")
    print(f"refit from {n} samples on [0, {p_max}] W")
    print(header)
    print("-" * len(header))
    worst = 0.0
    failed = []
    for cqi in ALL_CQIS:
        row = catalog_entry(cqi)
        true = utility_for_cqi(cqi)
        samples = [FitSample(float(p), true.evaluate(float(p))) for p in grid]
        res = fit_sigmoid(samples)
        da, db = abs(res.utility.a - row.a), abs(res.utility.b - row.b)
        worst = max(worst, da, db)
        if not res.converged:
            failed.append(cqi)
        print(f"{cqi:>3}  {row.a:>9.4f}  {res.utility.a:>9.4f}  {row.b:>9.4f}  "
              f"{res.utility.b:>9.4f}  {da:>8.1e}  {db:>8.1e}  {res.sse:>9.1e}  "
              f"{res.iterations:>5}")
    print("-" * len(header))
    print(f"worst parameter error: {worst:.2e}")
    if failed:
        print(f"NOT CONVERGED for cqi: {failed}")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
