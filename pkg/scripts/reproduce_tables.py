"""Fill both theta_min tables (numeric vs closed form) and print them."""

import argparse

from metroscope.scaling import table_report


def show(rep):
    print(f"Table {rep.which}: N={rep.N} nbar={rep.nbar:g} delta={rep.delta:g}")
    print(f"{'k':>4}  {'col':>3}  {'numeric':>14}  {'predicted':>14}  {'rel_err':>10}  stat_factor")
    for k, cells in rep.rows():
        for c in cells:
            tail = c.error or f"{c.relative_error:10.3e}"
            print(f"{k:>4g}  {c.column:>3}  {c.numeric:14.8g}  {c.predicted:14.8g}  {tail:>10}  {c.statistics_factor:.4g}")
    print()


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=8)
    ap.add_argument("--nbar", type=float, default=128.0, help="mean photon number for the coherent table")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    show(table_report(1, args.N, args.nbar, workers=args.workers))
    show(table_report(2, args.N, workers=args.workers))


if __name__ == "__main__":
    main()
