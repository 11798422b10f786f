"""Fit theta_min power laws in nbar and in N for the coherent families."""

import argparse

from metroscope.metrology import Scenario
from metroscope.scaling import SweepSpec, fit_power_law, run_sweep
from metroscope.states import Family

COHERENT = (Family.CoherentCat, Family.CoherentEntangled, Family.CoherentSeparable)
EXPECTED_N = {"C": lambda k: 0.0, "E": lambda k: k - 1, "S": lambda k: k - 0.5}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--nbar", type=float, nargs="+", default=[32, 64, 128, 256])
    ap.add_argument("--N", type=int, nargs="+", default=[1, 2, 4, 8])
    ap.add_argument("--scenario", default="EqualAction")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    scenario = Scenario.parse(args.scenario)
    shift = 1 if scenario is Scenario.Constrained else 0

    print("nbar exponents (expected -k)")
    for fam in COHERENT:
        for k in args.k:
            for N in args.N:
                recs = run_sweep(SweepSpec(fam, [k], [N], nbar_values=args.nbar, scenario=scenario), args.workers)
                fit = fit_power_law(recs, "nbar")
                print(f"  {fam.letter} k={k:<4g} N={N:<3d} exponent={fit.exponent:+.4f}  R2={fit.r_squared:.6f}")

    held = sorted(args.nbar)[len(args.nbar) // 2]
    print(f"N exponents at nbar={held:g}")
    for fam in COHERENT:
        for k in args.k:
            recs = run_sweep(SweepSpec(fam, [k], args.N, nbar_values=[held], scenario=scenario), args.workers)
            fit = fit_power_law(recs, "N")
            expected = EXPECTED_N[fam.letter](k) + (shift if fam.letter != "C" else 0)
            print(f"  {fam.letter} k={k:<4g} exponent={fit.exponent:+.4f}  expected={expected:+.4f}")


if __name__ == "__main__":
    main()
