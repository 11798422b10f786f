"""Command-line front end.

Exit codes: 0 success, 2 usage/config error, 3 engine/numeric error,
4 no distinguishability crossing inside the search window.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from .errors import MetroscopeError, NoCrossing, NotCovered
from .metrology import (
    Scenario,
    ThetaMinRequest,
    analytic_distinguishability,
    distinguishability_curve,
    predicted_theta_min,
    scenario_evolution,
)
from .overlap import SeriesBudget
from .scaling import ExperimentRecord, SweepSpec, refinement_plan, run_point, run_sweep, table_report
from .states import Family, FamilySpec, build_family

EXIT_OK, EXIT_USAGE, EXIT_ENGINE, EXIT_NO_CROSSING = 0, 2, 3, 4

RECORD_HEADER = [
    "family", "k", "N", "nbar_nominal", "nbar_exact", "scenario", "delta",
    "theta_min_numeric", "theta_min_predicted", "relative_error", "status",
]


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Fixed 12-significant-digit rendering used in every CSV."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.12g}"


def default_budget() -> SeriesBudget:
    raw = os.environ.get("METROSCOPE_EPSILON")
    if raw is None:
        return SeriesBudget()
    try:
        return SeriesBudget(epsilon=float(raw))
    except ValueError as exc:
        raise UsageError(f"METROSCOPE_EPSILON={raw!r}: {exc}") from None


def record_row(r: ExperimentRecord) -> list[str]:
    return [r.family.value, fmt(r.k), str(r.N), fmt(r.nbar_nominal), fmt(r.nbar_exact), r.scenario.value,
            fmt(r.delta), fmt(r.theta_min_numeric), fmt(r.theta_min_predicted), fmt(r.relative_error), r.status]


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- shared flag handling ---------------------------------------------------------

def _family_spec(args) -> FamilySpec:
    try:
        fam = Family.parse(args.family)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.N < 1:
        raise UsageError("--N must be a positive integer")
    alpha = 0.0
    if fam.is_coherent:
        if args.alpha is None and args.nbar is None:
            raise UsageError(f"{fam.value} needs --alpha or --nbar")
        if args.nbar is not None:
            if not args.nbar > 0:
                raise UsageError("--nbar must be positive")
            alpha = math.sqrt(2 * args.nbar / args.N)
        else:
            alpha = args.alpha
        if not abs(alpha) > 0:
            raise UsageError("coherent families need |alpha| > 0")
    return FamilySpec(fam, args.N, alpha)


def _scenario(args) -> Scenario:
    try:
        return Scenario.parse(args.scenario)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_state_flags(p: argparse.ArgumentParser):
    p.add_argument("--family", required=True, help="one of: " + ", ".join(f.value for f in Family))
    p.add_argument("--N", type=int, required=True, help="mode count / excitation number")
    amp = p.add_mutually_exclusive_group()
    amp.add_argument("--alpha", type=float, help="coherent amplitude per mode")
    amp.add_argument("--nbar", type=float, help="nominal mean photon number (alpha back-solved)")
    p.add_argument("--k", type=float, default=1.0, help="nonlinearity order (default 1)")
    p.add_argument("--scenario", default="EqualAction", help="EqualAction, Constrained or Collective")


# -- commands --------------------------------------------------------------------

def cmd_dcurve(args) -> int:
    if args.points < 1:
        raise UsageError("--points must be >= 1")
    if not args.theta_max > 0:
        raise UsageError("--theta-max must be positive")
    if not args.k > 0:
        raise UsageError("--k must be positive")
    spec = _family_spec(args)
    scenario = _scenario(args)
    state = build_family(spec)
    evo = scenario_evolution(spec, scenario, args.k)
    thetas = args.theta_max * np.arange(1, args.points + 1) / args.points
    d_num = distinguishability_curve(state, evo, thetas, default_budget())
    try:
        d_an = analytic_distinguishability(spec, args.k, thetas, scenario)
    except NotCovered:
        d_an = np.full(thetas.shape, math.nan)
    rows = [[fmt(t), fmt(a), fmt(b)] for t, a, b in zip(thetas, d_num, d_an)]
    _emit(_csv_text(["theta", "d_numeric", "d_analytic"], rows), args.out)
    return EXIT_OK


def cmd_theta_min(args) -> int:
    if not 0 <= args.delta < 1:
        raise UsageError("--delta: threshold must satisfy 0 <= delta < 1")
    if not args.k > 0:
        raise UsageError("--k must be positive")
    if args.theta_max is not None and not args.theta_max > 0:
        raise UsageError("--theta-max must be positive")
    spec = _family_spec(args)
    scenario = _scenario(args)
    rec = run_point(args.k, spec, scenario, args.delta, default_budget(), args.theta_max)
    if not rec.ok and math.isnan(rec.theta_min_numeric):
        print(rec.status, file=sys.stderr)
        if "no crossing" in rec.status:
            return EXIT_NO_CROSSING
        return EXIT_ENGINE
    line = f"theta_min={rec.theta_min_single_shot:.10f} predicted={rec.theta_min_predicted:.10f} " \
           f"rel_err={rec.relative_error:.3e}"
    if rec.statistics_factor != 1:
        line += f" stat_factor={rec.statistics_factor:.10f}"
    print(line)
    if not rec.ok:
        print(rec.status, file=sys.stderr)
    if args.csv:
        path = Path(args.csv)
        new = not path.exists() or path.stat().st_size == 0
        with path.open("a", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(RECORD_HEADER)
            w.writerow(record_row(rec))
    return EXIT_OK


_CONFIG_KEYS = {
    "experiment": {"family", "scenario", "k", "n", "nbar", "alpha", "delta"},
    "numerics": {"epsilon", "theta_max", "hard_cap"},
    "output": {"path"},
}


def _line_of(text: str, section: str, key: str) -> int:
    current = None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[(.+)\]$", s)
        if m:
            current = m.group(1).strip()
            continue
        if current == section and re.match(rf"{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
            return no
    return 0


def _numbers(text: str, raw: str, section: str, key: str, kind=float) -> list:
    out = []
    for tok in raw.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            v = kind(tok) if kind is int else float(tok)
        except ValueError:
            raise UsageError(f"line {_line_of(text, section, key)}: {key} = {raw!r}: {tok!r} is not a number") from None
        if not math.isfinite(v):
            raise UsageError(f"line {_line_of(text, section, key)}: {key} must be finite")
        out.append(v)
    return out


def load_config(path: str):
    """Parse an experiment config into (SweepSpec, output path)."""
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {path}")
    text = p.read_text()
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(p))
    except configparser.Error as exc:
        raise UsageError(f"malformed config: {exc}") from None
    for section in parser.sections():
        if section not in _CONFIG_KEYS:
            raise UsageError(f"line {_line_of_section(text, section)}: unknown section [{section}]")
        for key in parser[section]:
            if key not in _CONFIG_KEYS[section]:
                raise UsageError(f"line {_line_of(text, section, key)}: unknown key {key!r} in [{section}]")
    if "experiment" not in parser:
        raise UsageError("config needs an [experiment] section")
    exp = parser["experiment"]
    for required in ("family", "k", "n"):
        if required not in exp:
            raise UsageError(f"[experiment] is missing {required!r}")
    try:
        family = Family.parse(exp["family"])
        scenario = Scenario.parse(exp.get("scenario", "EqualAction"))
    except ValueError as exc:
        raise UsageError(f"line {_line_of(text, 'experiment', 'family')}: {exc}") from None
    k_values = _numbers(text, exp["k"], "experiment", "k")
    n_values = _numbers(text, exp["n"], "experiment", "n", int)
    has_nbar, has_alpha = "nbar" in exp, "alpha" in exp
    if has_nbar and has_alpha:
        raise UsageError(f"line {_line_of(text, 'experiment', 'alpha')}: give exactly one of nbar / alpha")
    if family.is_coherent and not (has_nbar or has_alpha):
        raise UsageError(f"{family.value} needs an nbar or alpha list")
    nbar = _numbers(text, exp["nbar"], "experiment", "nbar") if has_nbar else []
    alpha = _numbers(text, exp["alpha"], "experiment", "alpha") if has_alpha else []
    delta = _numbers(text, exp.get("delta", "0"), "experiment", "delta")
    if len(delta) != 1:
        raise UsageError(f"line {_line_of(text, 'experiment', 'delta')}: delta takes one value")

    num = parser["numerics"] if "numerics" in parser else {}
    budget = default_budget()
    theta_max = None
    try:
        if "epsilon" in num or "hard_cap" in num:
            eps = _numbers(text, num.get("epsilon", str(budget.epsilon)), "numerics", "epsilon")[0]
            cap = _numbers(text, num.get("hard_cap", str(budget.hard_cap)), "numerics", "hard_cap", int)[0]
            budget = SeriesBudget(eps, cap)
        if "theta_max" in num:
            theta_max = _numbers(text, num["theta_max"], "numerics", "theta_max")[0]
        spec = SweepSpec(family, k_values, [int(n) for n in n_values], nbar, alpha, scenario,
                         delta[0], budget, theta_max)
    except ValueError as exc:
        raise UsageError(f"invalid config: {exc}") from None
    out = parser["output"].get("path") if "output" in parser else None
    return spec, out


def _line_of_section(text: str, section: str) -> int:
    for no, line in enumerate(text.splitlines(), 1):
        if line.strip() == f"[{section}]":
            return no
    return 0


def cmd_sweep(args) -> int:
    spec, out = load_config(args.config)
    if args.out is not None:
        out = args.out
    records = run_sweep(spec, workers=args.workers)
    header = RECORD_HEADER
    text = _csv_text(header, [record_row(r) for r in records])
    _emit(text, out)
    failed = [r for r in records if math.isnan(r.theta_min_numeric)]
    for r in failed:
        print(f"{r.family.value} k={fmt(r.k)} N={r.N}: {r.status}", file=sys.stderr)
    if records and len(failed) == len(records):
        return EXIT_ENGINE
    return EXIT_OK


def cmd_table(args) -> int:
    if args.N < 1:
        raise UsageError("--N must be a positive integer")
    if not 0 <= args.delta < 1:
        raise UsageError("--delta must satisfy 0 <= delta < 1")
    if args.which == 1:
        if args.nbar is None:
            raise UsageError("table 1 needs --nbar")
        if 2 * args.nbar / args.N < 1:
            raise UsageError(f"--nbar {args.nbar:g} gives |alpha|^2 < 1 at N={args.N}")
    rep = table_report(args.which, args.N, args.nbar, args.delta, default_budget(), workers=args.workers)
    if args.csv:
        rows = []
        for k, cells in rep.rows():
            for c in cells:
                rows.append([fmt(k), c.column, fmt(c.numeric), fmt(c.predicted), fmt(c.relative_error),
                             fmt(c.statistics_factor), c.error or "ok"])
        _emit(_csv_text(["k", "column", "numeric", "predicted", "relative_error", "stat_factor", "status"], rows),
              None)
        return EXIT_OK
    title = "coherent" if args.which == 1 else "number"
    print(f"Table {args.which} ({title} states)  N={rep.N}  nbar={rep.nbar:g}  delta={rep.delta:g}")
    print(f"{'k':>5} | " + " | ".join(f"{c:^38}" for c in "CES"))
    print(f"{'':>5} | " + " | ".join(f"{'numeric':>12} {'predicted':>12} {'rel_err':>11}" for _ in "CES"))
    for k, cells in rep.rows():
        parts = []
        for c in cells:
            if c.error:
                parts.append(f"{'error':>12} {c.predicted:>12.6g} {'-':>11}")
            else:
                parts.append(f"{c.numeric:>12.6g} {c.predicted:>12.6g} {c.relative_error:>11.3e}")
        print(f"{k:>5g} | " + " | ".join(parts))
    flagged = {c.column for _, cells in rep.rows() for c in cells if c.statistics_factor != 1}
    if flagged:
        print(f"note: column {', '.join(sorted(flagged))} numeric includes the 1/sqrt(N) "
              f"classical-statistics factor (single-shot value x {1 / math.sqrt(rep.N):.6g})")
    errors = [c for _, cells in rep.rows() for c in cells if c.error]
    for c in errors:
        print(f"k={c.k:g} {c.column}: {c.error}", file=sys.stderr)
    return EXIT_OK


def cmd_refine(args) -> int:
    if not args.nbar >= 1:
        raise UsageError("--nbar must be >= 1")
    plan = refinement_plan(args.nbar)
    print(f"steps={plan.steps} nbar_total={plan.nbar_total:g}")
    return EXIT_OK


def cmd_predict(args) -> int:
    if not 0 <= args.delta < 1:
        raise UsageError("--delta must satisfy 0 <= delta < 1")
    if not args.k > 0:
        raise UsageError("--k must be positive")
    spec = _family_spec(args)
    try:
        value = predicted_theta_min(spec, args.k, _scenario(args), args.delta, args.exact_arccos)
    except NotCovered as exc:
        raise UsageError(str(exc)) from None
    print(f"predicted={value:.10f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metroscope", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dcurve", help="sample d(theta) numerically and analytically")
    _add_state_flags(p)
    p.add_argument("--theta-max", type=float, default=math.pi)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_dcurve)

    p = sub.add_parser("theta-min", help="solve the minimum resolvable phase")
    _add_state_flags(p)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--theta-max", type=float)
    p.add_argument("--csv", metavar="PATH", help="append an experiment record row to PATH")
    p.set_defaults(func=cmd_theta_min)

    p = sub.add_parser("sweep", help="run a configured parameter sweep")
    p.add_argument("config")
    p.add_argument("--out", help="CSV path (overrides the config's [output] path)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("table", help="reproduce the 3x3 theta_min tables")
    p.add_argument("--which", type=int, choices=(1, 2), required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--nbar", type=float)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--csv", action="store_true", help="flat CSV instead of the grid")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("refine", help="resource cost of iterative theta refinement")
    p.add_argument("--nbar", type=float, required=True)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("predict", help="closed-form theta_min lookup")
    _add_state_flags(p)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--exact-arccos", action="store_true")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"metroscope {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoCrossing as exc:
        print(f"metroscope {args.command}: {exc}", file=sys.stderr)
        return EXIT_NO_CROSSING
    except (MetroscopeError, ArithmeticError) as exc:
        print(f"metroscope {args.command}: engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except ValueError as exc:
        print(f"metroscope {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
