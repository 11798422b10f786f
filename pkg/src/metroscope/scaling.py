"""Parameter sweeps, power-law fits and table reproduction."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import MetroscopeError
from .metrology import (
    Scenario,
    ThetaMinRequest,
    classical_statistics_factor,
    predicted_theta_min,
    scenario_evolution,
    theta_min,
)
from .overlap import DEFAULT_BUDGET, SeriesBudget
from .states import Family, FamilySpec, build_family, mean_photon_number, nominal_mean_photon

SEPARABLE_SWEEP_CAP = 14
TABLE_K = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class SweepSpec:
    """Grid over (k, N, nbar).  Coherent families back-solve alpha = sqrt(2 nbar / N)
    unless an explicit alpha grid is given; number families ignore nbar."""

    family: Family
    k_values: Sequence[float]
    N_values: Sequence[int]
    nbar_values: Sequence[float] = ()
    alpha_values: Sequence[float] = ()
    scenario: Scenario = Scenario.EqualAction
    delta: float = 0.0
    budget: SeriesBudget = DEFAULT_BUDGET
    theta_max: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        for name in ("k_values", "N_values", "nbar_values", "alpha_values"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.k_values or not self.N_values:
            raise ValueError("k and N grids must be non-empty")
        if any(not k > 0 for k in self.k_values):
            raise ValueError("every k must be positive")
        if any(int(n) != n or n < 1 for n in self.N_values):
            raise ValueError("every N must be a positive integer")
        if not 0 <= self.delta < 1:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")
        if self.family.is_coherent:
            if bool(self.nbar_values) == bool(self.alpha_values):
                raise ValueError("coherent sweeps need exactly one of nbar_values / alpha_values")
            for N, a2 in self._amplitudes_squared():
                if a2 < 1:
                    raise ValueError(f"|alpha|^2 = {a2:g} < 1 at N={N}; raise nbar")

    def _amplitudes_squared(self):
        for N in self.N_values:
            if self.nbar_values:
                for nb in self.nbar_values:
                    yield N, 2 * nb / N
            else:
                for a in self.alpha_values:
                    yield N, abs(a) ** 2

    def points(self) -> list[tuple[float, FamilySpec]]:
        """Grid points in k-outer, N-middle, nbar-inner order."""
        out = []
        for k in self.k_values:
            for N in self.N_values:
                N = int(N)
                if not self.family.is_coherent:
                    out.append((float(k), FamilySpec(self.family, N)))
                elif self.nbar_values:
                    out.extend((float(k), FamilySpec(self.family, N, math.sqrt(2 * nb / N)))
                               for nb in self.nbar_values)
                else:
                    out.extend((float(k), FamilySpec(self.family, N, a)) for a in self.alpha_values)
        return out


@dataclass(frozen=True)
class ExperimentRecord:
    family: Family
    k: float
    N: int
    nbar_nominal: float
    nbar_exact: float
    scenario: Scenario
    delta: float
    theta_min_numeric: float
    theta_min_predicted: float
    relative_error: float
    status: str = "ok"
    theta_min_single_shot: float = math.nan
    statistics_factor: float = 1.0

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def run_point(k: float, spec: FamilySpec, scenario: Scenario, delta: float,
              budget: SeriesBudget = DEFAULT_BUDGET, theta_max: Optional[float] = None) -> ExperimentRecord:
    """Numeric and predicted theta_min at one grid point; failures become error rows.

    ``theta_min_numeric`` is the single-shot solver value times the family's
    classical-statistics factor, which is what the closed forms describe.
    """
    scenario = Scenario(scenario)
    nbar = nominal_mean_photon(spec)
    factor = classical_statistics_factor(spec)
    base = dict(family=spec.family, k=k, N=spec.N, nbar_nominal=nbar, scenario=scenario,
                delta=delta, statistics_factor=factor)
    try:
        predicted = predicted_theta_min(spec, k, scenario, delta)
    except MetroscopeError as exc:
        predicted, pred_error = math.nan, str(exc)
    else:
        pred_error = None
    if spec.family.is_separable and spec.N > SEPARABLE_SWEEP_CAP:
        return ExperimentRecord(nbar_exact=nbar, theta_min_numeric=math.nan, theta_min_predicted=predicted,
                                relative_error=math.nan,
                                status=f"error: separable N>{SEPARABLE_SWEEP_CAP}, analytic prediction only",
                                **base)
    try:
        state = build_family(spec)
        nbar_exact = mean_photon_number(state)
        evo = scenario_evolution(spec, scenario, k)
        res = theta_min(ThetaMinRequest(state, evo, delta, theta_max), budget)
    except (MetroscopeError, ValueError, ArithmeticError) as exc:
        return ExperimentRecord(nbar_exact=math.nan, theta_min_numeric=math.nan, theta_min_predicted=predicted,
                                relative_error=math.nan, status=f"error: {exc}", **base)
    numeric = res.theta_min * factor
    rel = abs(numeric - predicted) / predicted if pred_error is None else math.nan
    return ExperimentRecord(nbar_exact=nbar_exact, theta_min_numeric=numeric, theta_min_predicted=predicted,
                            relative_error=rel, status="ok" if pred_error is None else f"error: {pred_error}",
                            theta_min_single_shot=res.theta_min, **base)


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[ExperimentRecord]:
    """One record per grid point, in grid order regardless of ``workers``."""
    points = spec.points()

    def job(point):
        k, fspec = point
        return run_point(k, fspec, spec.scenario, spec.delta, spec.budget, spec.theta_max)

    if workers <= 1:
        return [job(p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, points))


# -- power-law fits --------------------------------------------------------------

@dataclass(frozen=True)
class ScalingFit:
    axis: str
    exponent: float
    log_prefactor: float
    r_squared: float
    points_used: int

    @property
    def prefactor(self) -> float:
        return math.exp(self.log_prefactor)


def fit_power_law(records: Sequence[ExperimentRecord], axis: str = "nbar",
                  quantity: str = "theta_min_numeric") -> ScalingFit:
    """Least-squares fit of ln(theta) against ln(axis value)."""
    if axis not in ("nbar", "N"):
        raise ValueError(f"axis must be 'nbar' or 'N', got {axis!r}")
    rows = [r for r in records if r.ok and getattr(r, quantity) > 0]
    if len(rows) < 3:
        raise ValueError(f"need at least 3 usable records, got {len(rows)}")
    held = {(r.family, r.k, r.scenario, r.delta) for r in rows}
    if axis == "nbar":
        held_axis = {r.N for r in rows}
    else:
        held_axis = {float(f"{r.nbar_nominal:.9g}") for r in rows} if rows[0].family.is_coherent else set()
    if len(held) > 1 or len(held_axis) > 1:
        raise ValueError("records vary along more than the fitted axis")
    x = np.array([r.nbar_nominal if axis == "nbar" else r.N for r in rows], dtype=float)
    if np.all(x == x[0]):
        raise ValueError(f"degenerate axis: every record has {axis} = {x[0]:g}")
    lx = np.log(x)
    ly = np.log([getattr(r, quantity) for r in rows])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return ScalingFit(axis, float(slope), float(intercept), min(1.0, max(0.0, r2)), len(rows))


# -- refinement accounting ----------------------------------------------------------

@dataclass(frozen=True)
class RefinementPlan:
    nbar_final: float
    steps: int
    nbar_total: float


def refinement_plan(nbar_final: float) -> RefinementPlan:
    """Cost of narrowing theta from (0, 2 pi] down to (0, pi/nbar] by halving."""
    if not nbar_final >= 1:
        raise ValueError(f"nbar_final must be >= 1, got {nbar_final}")
    steps = math.ceil(math.log2(nbar_final)) + 1
    return RefinementPlan(nbar_final, steps, 2 * nbar_final - 1)


# -- table reproduction ----------------------------------------------------------

@dataclass(frozen=True)
class TableCell:
    k: float
    column: str
    numeric: float
    predicted: float
    relative_error: float
    single_shot: float
    statistics_factor: float
    error: Optional[str] = None


@dataclass
class TableReport:
    which: int
    N: int
    nbar: float
    delta: float
    cells: dict = field(default_factory=dict)

    def cell(self, k: float, column: str) -> TableCell:
        return self.cells[(float(k), column)]

    def rows(self):
        for k in TABLE_K:
            yield k, [self.cells[(k, c)] for c in "CES"]


_TABLE_FAMILIES = {
    1: {"C": Family.CoherentCat, "E": Family.CoherentEntangled, "S": Family.CoherentSeparable},
    2: {"C": Family.NumberCat, "E": Family.NumberEntangled, "S": Family.NumberSeparable},
}


def table_report(which: int, N: int, nbar: Optional[float] = None, delta: float = 0.0,
                 budget: SeriesBudget = DEFAULT_BUDGET, workers: int = 1) -> TableReport:
    """Fill the 3x3 (k x {C, E, S}) grid of numeric vs closed-form theta_min.

    Table 1 uses the coherent families at fixed nbar (alpha back-solved per
    column); Table 2 uses the number families, where nbar = N/2.
    """
    if which not in _TABLE_FAMILIES:
        raise ValueError(f"which must be 1 or 2, got {which}")
    if which == 1:
        if nbar is None:
            raise ValueError("Table 1 needs nbar")
        if 2 * nbar / N < 1:
            raise ValueError(f"nbar={nbar:g} gives |alpha|^2 = {2 * nbar / N:g} < 1 at N={N}")
        alpha = math.sqrt(2 * nbar / N)
    else:
        alpha = 0.0
        nbar = N / 2
    jobs = []
    for k in TABLE_K:
        for col, fam in _TABLE_FAMILIES[which].items():
            jobs.append((k, col, FamilySpec(fam, N, alpha)))

    def job(item):
        k, col, spec = item
        rec = run_point(k, spec, Scenario.EqualAction, delta, budget)
        err = None if rec.ok else rec.status
        return TableCell(k, col, rec.theta_min_numeric, rec.theta_min_predicted, rec.relative_error,
                         rec.theta_min_single_shot, rec.statistics_factor, err)

    if workers <= 1:
        cells = [job(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(job, jobs))
    report = TableReport(which, N, nbar, delta)
    for c in cells:
        report.cells[(c.k, c.column)] = c
    return report
