"""Distinguishability, minimum resolvable phase and closed-form predictors."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import Indistinguishable, NoCrossing, NotCovered
from .overlap import DEFAULT_BUDGET, EvolutionSpec, Generator, SeriesBudget, overlap_curve
from .states import Family, FamilySpec, SuperpositionState, nominal_mean_photon

GOLDEN = (math.sqrt(5) - 1) / 2
DEFAULT_DELTA = 1e-3
_SCAN_CHUNK = 256


class Scenario(str, enum.Enum):
    EqualAction = "EqualAction"
    Constrained = "Constrained"
    Collective = "Collective"

    @classmethod
    def parse(cls, text: str) -> Scenario:
        key = text.replace("-", "").replace("_", "").lower()
        for sc in cls:
            if sc.value.lower() == key:
                return sc
        raise ValueError(f"unknown scenario {text!r}; valid scenarios: {', '.join(s.value for s in cls)}")


def scenario_evolution(spec: FamilySpec, scenario: Scenario, k: float) -> EvolutionSpec:
    """Generator and mode weights a resource scenario implies for a family.

    Constrained splits the unit action evenly over the modes; a N00N probe only
    ever exposes its first mode.
    """
    scenario = Scenario(scenario)
    modes = spec.mode_count
    if scenario is Scenario.Collective:
        return EvolutionSpec.collective(k, modes)
    if spec.family is Family.Noon:
        return EvolutionSpec.per_mode(k, modes, (1.0, 0.0))
    if scenario is Scenario.Constrained:
        return EvolutionSpec.per_mode(k, modes, (1.0 / modes,) * modes)
    return EvolutionSpec.per_mode(k, modes)


def classical_statistics_factor(spec: FamilySpec) -> float:
    """Repetition gain credited to separable probes: N independent modes -> 1/sqrt(N)."""
    return 1 / math.sqrt(spec.N) if spec.family.is_separable else 1.0


# -- distinguishability --------------------------------------------------------

def distinguishability_curve(state: SuperpositionState, evo: EvolutionSpec, thetas,
                             budget: SeriesBudget = DEFAULT_BUDGET) -> np.ndarray:
    ov = overlap_curve(state, evo, thetas, budget)
    return np.clip(np.abs(ov) ** 2, 0.0, 1.0)


def distinguishability(state: SuperpositionState, evo: EvolutionSpec, theta: float,
                       budget: SeriesBudget = DEFAULT_BUDGET) -> float:
    """d = |<psi|U(theta)|psi>|^2, clamped to [0, 1]."""
    return float(distinguishability_curve(state, evo, [theta], budget)[0])


def analytic_distinguishability(spec: FamilySpec, k: float, theta,
                                scenario: Scenario = Scenario.EqualAction):
    """Large-amplitude closed forms for d(theta); exact for the number families.

    ``theta`` may be an array.  Constrained divides the phase evenly over the
    modes of the multimode families; Collective maps the entangled families onto
    the single-mode cat with the same total photon number.
    """
    scenario = Scenario(scenario)
    fam, N = spec.family, spec.N
    theta = np.asarray(theta, dtype=float)
    if fam.is_coherent:
        per_mode = abs(spec.alpha) ** 2
    else:
        per_mode = 1.0
    total = N * per_mode  # photons in the excited branch

    if scenario is Scenario.Collective:
        if fam.letter != "E":
            raise NotCovered(f"no closed-form d for {fam.value} under the collective generator")
        return 0.5 * (1 + np.cos(theta * total ** k))
    if scenario is Scenario.Constrained and spec.mode_count > 1 and fam is not Family.Noon:
        theta = theta / spec.mode_count

    if fam in (Family.CoherentCat, Family.NumberCat, Family.Noon):
        if fam is Family.Noon:
            total = N
        return 0.5 * (1 + np.cos(theta * total ** k))
    if fam is Family.CoherentEntangled:
        return 0.5 * (1 + np.cos(theta * N * per_mode ** k))
    if fam is Family.NumberEntangled:
        return 0.5 * (1 + np.cos(theta * N))
    return ((1 + np.cos(theta * per_mode ** k)) / 2) ** N


# -- theta_min -----------------------------------------------------------------

@dataclass(frozen=True)
class ThetaMinRequest:
    state: SuperpositionState
    evo: EvolutionSpec
    delta: float = 0.0
    theta_max: Optional[float] = None
    scan_points_per_period: int = 64
    bisection_tol: float = 1e-10

    def __post_init__(self):
        if not 0 <= self.delta < 1:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")
        if self.theta_max is not None and not self.theta_max > 0:
            raise ValueError(f"theta_max must be positive, got {self.theta_max}")
        if self.scan_points_per_period < 1:
            raise ValueError("scan_points_per_period must be positive")
        if not self.bisection_tol > 0:
            raise ValueError("bisection_tol must be positive")

    @property
    def search_ceiling(self) -> float:
        if self.theta_max is not None:
            return self.theta_max
        w = min(w for w in self.evo.mode_weights if w > 0) if any(self.evo.mode_weights) else 1.0
        return 2 * math.pi / w


@dataclass(frozen=True)
class ThetaMinResult:
    theta_min: float
    achieved_d: float
    bracket: tuple[float, float]
    scan_step: float
    crossings_found: int


def oscillation_scale(state: SuperpositionState, evo: EvolutionSpec) -> float:
    """Largest generator 'energy' over the state's branches.

    Uses mean photon numbers per factor, so for a coherent factor the branch
    energy is w |alpha|^(2k); d(theta) varies no faster than about this rate.
    """
    def branch_means(s):
        if s.parts is not None:
            return None
        return [[f.mean_photons for f in p] for p in s.products]

    k, w = evo.k, evo.mode_weights
    if evo.generator is Generator.Collective:
        parts = state.parts if state.parts is not None else (state,)
        top = sum(max(sum(row) for row in branch_means(p)) for p in parts)
        return w[0] * top ** k
    parts = state.parts if state.parts is not None else (state,)
    total, offset = 0.0, 0
    for p in parts:
        ws = w[offset: offset + p.mode_count]
        total += max(sum(wi * m ** k for wi, m in zip(ws, row)) for row in branch_means(p))
        offset += p.mode_count
    return total


def _golden_minimum(f, a: float, b: float, tol: float) -> float:
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return c if fc <= fd else d


def _scan(d_of, step: float, ceiling: float, delta: float):
    """Walk theta = step, 2 step, ... and stop at the first usable event.

    Returns (index, thetas, values) where ``index`` points at the first sample
    with d <= delta (delta > 0) or at the first local minimum (delta == 0).
    """
    n_total = int(math.floor(ceiling / step + 1e-9))
    thetas = [0.0]
    values = [1.0]
    start = 1
    while start <= n_total:
        stop = min(n_total, start + _SCAN_CHUNK - 1)
        grid = step * np.arange(start, stop + 1, dtype=float)
        vals = d_of(grid)
        base = len(thetas)
        thetas.extend(grid.tolist())
        values.extend(vals.tolist())
        if delta > 0:
            hit = np.nonzero(vals <= delta)[0]
            if hit.size:
                return base + int(hit[0]), thetas, values
        else:
            for i in range(max(1, base - 1), len(values) - 1):
                if values[i] == 0.0 or (values[i + 1] > values[i] and values[i] < values[i - 1]):
                    return i, thetas, values
        start = stop + 1
    return None, thetas, values


def _count_events(values: list, delta: float) -> int:
    v = np.asarray(values)
    if delta > 0:
        return int(np.count_nonzero((v[:-1] > delta) & (v[1:] <= delta)))
    return int(np.count_nonzero((v[1:-1] < v[:-2]) & (v[1:-1] < v[2:])) + (v[-1] == 0))


def theta_min(req: ThetaMinRequest, budget: SeriesBudget = DEFAULT_BUDGET) -> ThetaMinResult:
    """Smallest theta with d(theta) <= delta; for delta == 0 the first minimum of d.

    The scan step is tied to the state's oscillation scale.  A crossing is then
    bisected, a minimum refined by golden section.  If the refined minimum sits
    on its bracket edge the scan is repeated once with a four times finer step.
    """
    state, evo, delta = req.state, req.evo, req.delta
    scale = oscillation_scale(state, evo)
    ceiling = req.search_ceiling
    if scale <= 0:
        raise NoCrossing("the generator does not act on this state; d(theta) = 1", min_d=1.0)

    def d_of(thetas):
        return distinguishability_curve(state, evo, thetas, budget)

    def d1(theta):
        return float(d_of([theta])[0])

    step = 2 * math.pi / (scale * req.scan_points_per_period)
    for attempt in range(2):
        idx, thetas, values = _scan(d_of, step, ceiling, delta)
        if idx is None:
            raise NoCrossing(
                f"no crossing of d <= {delta:g} on (0, {ceiling:g}]; minimum d seen {min(values):.6g}",
                min_d=float(min(values)),
            )
        events = _count_events(values[: idx + 2], delta)
        if delta > 0:
            lo, hi = thetas[idx - 1], thetas[idx]
            while hi - lo > req.bisection_tol * hi:
                mid = 0.5 * (lo + hi)
                if d1(mid) <= delta:
                    hi = mid
                else:
                    lo = mid
            return ThetaMinResult(hi, d1(hi), (lo, hi), step, events)
        if values[idx] == 0.0:
            th = thetas[idx]
            return ThetaMinResult(th, 0.0, (thetas[idx - 1], thetas[idx + 1]), step, events)
        lo, hi = thetas[idx - 1], thetas[idx + 1]
        tol = req.bisection_tol * thetas[idx]
        best = _golden_minimum(d1, lo, hi, tol)
        on_edge = best - lo <= 2 * tol or hi - best <= 2 * tol
        if not on_edge or attempt == 1:
            return ThetaMinResult(best, d1(best), (lo, hi), step, events)
        step /= 4
    raise AssertionError("unreachable")


# -- closed-form predictions ---------------------------------------------------

def _numerator(delta: float, exact_arccos: bool) -> float:
    if exact_arccos:
        return math.acos(2 * delta - 1)
    return math.pi - 2 * math.sqrt(delta)


def predicted_theta_min(spec: FamilySpec, k: float, scenario: Scenario = Scenario.EqualAction,
                        delta: float = 0.0, exact_arccos: bool = False) -> float:
    """Closed-form theta_min for a family under a resource scenario.

    ``exact_arccos`` swaps the small-delta numerator pi - 2 sqrt(delta) for
    arccos(2 delta - 1).  Separable families include the 1/sqrt(N) repetition gain.
    """
    scenario = Scenario(scenario)
    if not 0 <= delta < 1:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    fam, N = spec.family, spec.N
    nbar = nominal_mean_photon(spec)
    if nbar <= 0:
        raise ValueError("closed forms need a positive mean photon number")
    top = _numerator(delta, exact_arccos)
    two_n = 2 * nbar
    letter = fam.letter

    if scenario is Scenario.Collective:
        if fam is Family.CoherentEntangled:
            return top / two_n ** k
        raise NotCovered(f"{fam.value} under the collective generator has no closed form")
    if fam is Family.Noon and scenario is not Scenario.EqualAction:
        raise NotCovered("Noon only has a closed form for equal action (as a single-mode cat)")

    if fam.is_coherent:
        if scenario is Scenario.EqualAction:
            power = {"C": 0.0, "E": k - 1, "S": k - 0.5}[letter]
        else:
            power = {"C": 0.0, "E": k, "S": k + 0.5}[letter]
        return top * N ** power / two_n ** k
    if scenario is Scenario.EqualAction:
        return {"C": top / two_n ** k, "E": top / two_n, "S": top / math.sqrt(two_n)}[letter]
    return {"C": top / two_n ** (k - 1), "E": top, "S": top * math.sqrt(two_n)}[letter]


# -- Cramer-Rao ----------------------------------------------------------------

@dataclass(frozen=True)
class CramerRaoQuery:
    delta_theta: float
    M: int
    d: float

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")
        if self.d < 0:
            raise ValueError(f"d must be >= 0, got {self.d}")


def cramer_rao_rhs(q: CramerRaoQuery) -> float:
    """Lower bound dtheta^2 / (4 M (1 - d)) on the estimator's scaled variance."""
    if q.d >= 1:
        raise Indistinguishable(f"states indistinguishable (d = {q.d}); the bound diverges")
    return q.delta_theta ** 2 / (4 * q.M * (1 - q.d))
