"""Run every Monte Carlo vs closed-form scenario and print a z-score table.

Usage: python scripts/run_compare.py [--samples N] [--seed S] [--workers W]
"""

import argparse
import sys

from cohpurify.reports import compare


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=400_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=4)
    args = parser.parse_args()
    report = compare(samples=args.samples, seed=args.seed, workers=args.workers)
    print(f"{'scenario':24s} {'case':28s} {'quantity':18s} {'analytic':>10s} {'mc':>10s} {'se':>9s} {'|z|':>6s}")
    for c in report.cases:
        print(f"{c.scenario:24s} {c.case:28s} {c.quantity:18s} {c.analytic:10.5f} {c.mc:10.5f} "
              f"{c.stderr:9.2e} {c.z:6.2f}{'' if c.passed else '  FAIL'}")
    for err in report.errors:
        print("error:", err)
    print(f"max |z| = {report.max_abs_z():.2f}; {'all passed' if report.passed else 'FAILURES'}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
