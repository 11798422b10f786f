"""Evolved overlaps <psi| exp(i theta H) |psi> for number-diagonal generators.

H is either ``sum_m w_m n_m**k`` (per-mode) or ``(sum_m n_m)**k`` (collective).
Coherent components are expanded in the number basis; the resulting series
``sum_j z**j / j! * exp(i phase (j + n0)**k)`` is cut where a Poisson-type
remainder bound drops below the budget's epsilon.  Because every phase factor
has unit modulus the bound holds for any k and any phase.

The sign convention is ``U = exp(+i theta H)``; distinguishability does not
depend on it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .errors import DimensionError, TruncationOverflow
from .states import (
    Coherent,
    ModeFactor,
    Number,
    SuperpositionState,
    contract,
    number_coherent_amplitude,
)


class Generator(str, enum.Enum):
    PerMode = "PerMode"
    Collective = "Collective"


@dataclass(frozen=True)
class SeriesBudget:
    epsilon: float = 1e-12
    hard_cap: int = 100_000

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.hard_cap < 16:
            raise ValueError(f"hard_cap must be >= 16, got {self.hard_cap}")


DEFAULT_BUDGET = SeriesBudget()


@dataclass(frozen=True)
class EvolutionSpec:
    generator: Generator
    k: float
    mode_weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "generator", Generator(self.generator))
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "mode_weights", tuple(float(w) for w in self.mode_weights))
        if not self.k > 0 or not math.isfinite(self.k):
            raise ValueError(f"order k must be positive, got {self.k}")
        if not self.mode_weights:
            raise ValueError("mode_weights must not be empty")
        if any(not 0 <= w <= 1 for w in self.mode_weights):
            raise ValueError(f"mode weights must lie in [0, 1], got {self.mode_weights}")
        if self.generator is Generator.Collective and len(set(self.mode_weights)) != 1:
            raise ValueError("the collective generator acts on all modes alike; weights must be equal")

    @classmethod
    def per_mode(cls, k: float, modes: int, weights: Sequence[float] | None = None) -> EvolutionSpec:
        return cls(Generator.PerMode, k, tuple(weights) if weights is not None else (1.0,) * modes)

    @classmethod
    def collective(cls, k: float, modes: int, weight: float = 1.0) -> EvolutionSpec:
        return cls(Generator.Collective, k, (weight,) * modes)


# -- series core ---------------------------------------------------------------

@lru_cache(maxsize=4096)
def truncation_index(r: float, log_prefactor: float, epsilon: float, hard_cap: int) -> int:
    """Smallest J with exp(log_prefactor) * sum_{j>J} r**j/j! <= epsilon.

    For J + 2 > r the remainder is bounded by the first omitted term over
    ``1 - r/(J+2)``; below that the Lagrange form ``r**(J+1)/(J+1)! e**r`` is used.
    """
    if r == 0:
        return 0
    log_eps = math.log(epsilon)
    log_r = math.log(r)
    start = 0
    stop = min(hard_cap, int(r + 12 * math.sqrt(r) + 64))
    while True:
        J = np.arange(start, stop + 1, dtype=float)
        log_first = (J + 1) * log_r - gammaln(J + 2)
        ratio = r / (J + 2)
        geometric = np.where(ratio < 1, log_first - np.log1p(-np.where(ratio < 1, ratio, 0)), np.inf)
        lagrange = log_first + r
        log_bound = log_prefactor + np.minimum(geometric, lagrange)
        hit = np.nonzero(log_bound <= log_eps)[0]
        if hit.size:
            return int(J[hit[0]])
        if stop >= hard_cap:
            raise TruncationOverflow(
                f"truncation overflow: tail bound {math.exp(log_bound[-1]):.3e} still above "
                f"epsilon={epsilon:g} at hard_cap={hard_cap}",
                achieved_bound=float(math.exp(log_bound[-1])),
            )
        start, stop = stop + 1, min(hard_cap, 2 * stop + 1)


def _series(z: complex, log_prefactor: float, r: float, k: float, phases: np.ndarray,
            n0: int, budget: SeriesBudget) -> np.ndarray:
    """exp(log_prefactor) * sum_j z**j/j! * exp(i phase (j+n0)**k) for each phase."""
    J = truncation_index(float(r), float(log_prefactor), budget.epsilon, budget.hard_cap)
    j = np.arange(J + 1, dtype=float)
    if z == 0:
        log_terms = np.full(1, log_prefactor, dtype=complex)
        j = j[:1]
    else:
        log_terms = log_prefactor + j * np.log(complex(z)) - gammaln(j + 1)
    weights = np.exp(log_terms)
    energies = np.power(j + n0, k)
    out = np.exp(1j * np.multiply.outer(phases, energies)) @ weights
    # U(0) is the identity: use the closed-form overlap instead of the truncated sum
    still = phases == 0
    if np.any(still):
        out[still] = np.exp(log_prefactor + z)
    return out


def single_mode_factors(bra: ModeFactor, ket: ModeFactor, k: float, phases,
                        budget: SeriesBudget = DEFAULT_BUDGET) -> np.ndarray:
    """Vectorised :func:`single_mode_factor` over an array of phases."""
    phases = np.atleast_1d(np.asarray(phases, dtype=float))
    if isinstance(bra, Number) and isinstance(ket, Number):
        if bra.occupation != ket.occupation:
            return np.zeros(phases.shape, dtype=complex)
        return np.exp(1j * phases * float(bra.occupation) ** k)
    if isinstance(bra, Coherent) and isinstance(ket, Coherent):
        a, b = bra.amplitude, ket.amplitude
        log_pref = -0.5 * (abs(a) ** 2 + abs(b) ** 2)
        return _series(a.conjugate() * b, log_pref, abs(a) * abs(b), k, phases, 0, budget)
    if isinstance(bra, Number):
        n = bra.occupation
        amp = number_coherent_amplitude(n, ket.amplitude)
    else:
        n = ket.occupation
        amp = number_coherent_amplitude(n, bra.amplitude).conjugate()
    return amp * np.exp(1j * phases * float(n) ** k)


def single_mode_factor(bra: ModeFactor, ket: ModeFactor, k: float, phase: float,
                       budget: SeriesBudget = DEFAULT_BUDGET) -> complex:
    """<bra| exp(i phase n**k) |ket> for one mode."""
    return complex(single_mode_factors(bra, ket, k, [phase], budget)[0])


def _collective_key(bra: Sequence[ModeFactor], ket: Sequence[ModeFactor]):
    """Reduce a term pair to (amplitude, z, log_prefactor, r, n0), or None if orthogonal."""
    amp = 1.0 + 0j
    z = 0j
    log_pref = 0.0
    r = 0.0
    n0 = 0
    for fa, fb in zip(bra, ket):
        if isinstance(fa, Number) and isinstance(fb, Number):
            if fa.occupation != fb.occupation:
                return None
            n0 += fa.occupation
        elif isinstance(fa, Coherent) and isinstance(fb, Coherent):
            a, b = fa.amplitude, fb.amplitude
            z += a.conjugate() * b
            log_pref -= 0.5 * (abs(a) ** 2 + abs(b) ** 2)
            r += abs(a) * abs(b)
        elif isinstance(fa, Number):
            amp *= number_coherent_amplitude(fa.occupation, fb.amplitude)
            n0 += fa.occupation
        else:
            amp *= number_coherent_amplitude(fb.occupation, fa.amplitude).conjugate()
            n0 += fb.occupation
    return amp, z, log_pref, r, n0


def collective_factors(bra: Sequence[ModeFactor], ket: Sequence[ModeFactor], k: float, phases,
                       budget: SeriesBudget = DEFAULT_BUDGET) -> np.ndarray:
    phases = np.atleast_1d(np.asarray(phases, dtype=float))
    if len(bra) != len(ket):
        raise DimensionError(f"term mode counts differ: {len(bra)} vs {len(ket)}")
    key = _collective_key(bra, ket)
    if key is None or key[0] == 0:
        return np.zeros(phases.shape, dtype=complex)
    amp, z, log_pref, r, n0 = key
    return amp * _series(z, log_pref, r, k, phases, n0, budget)


def collective_factor(bra: Sequence[ModeFactor], ket: Sequence[ModeFactor], k: float, phase: float,
                      budget: SeriesBudget = DEFAULT_BUDGET) -> complex:
    """<bra| exp(i phase (sum_m n_m)**k) |ket> for two product terms."""
    return complex(collective_factors(bra, ket, k, [phase], budget)[0])


# -- whole-state overlaps ------------------------------------------------------

def _per_mode_curve(state: SuperpositionState, k: float, weights: Sequence[float],
                    thetas: np.ndarray, budget: SeriesBudget) -> np.ndarray:
    if state.parts is not None:
        out = np.ones(thetas.shape, dtype=complex)
        offset = 0
        for part in state.parts:
            w = weights[offset: offset + part.mode_count]
            out *= _per_mode_curve(part, k, w, thetas, budget)
            offset += part.mode_count
        return out

    def bracket(m, fa, fb):
        return single_mode_factors(fa, fb, k, weights[m] * thetas, budget)

    return contract(state, state, bracket, shape=thetas.shape)


def _collective_curve(state: SuperpositionState, k: float, weight: float,
                      thetas: np.ndarray, budget: SeriesBudget) -> np.ndarray:
    coeffs = state.coefficients
    products = state.products
    phases = weight * thetas
    series_cache: dict = {}
    total = np.zeros(thetas.shape, dtype=complex)
    for i, bra in enumerate(products):
        ci = coeffs[i].conjugate()
        for j, ket in enumerate(products):
            key = _collective_key(bra, ket)
            if key is None or key[0] == 0:
                continue
            amp, z, log_pref, r, n0 = key
            skey = (z, log_pref, r, n0)
            if skey not in series_cache:
                series_cache[skey] = _series(z, log_pref, r, k, phases, n0, budget)
            total = total + (ci * coeffs[j] * amp) * series_cache[skey]
    return total


def overlap_curve(state: SuperpositionState, evo: EvolutionSpec, thetas,
                  budget: SeriesBudget = DEFAULT_BUDGET) -> np.ndarray:
    """<psi|U(theta)|psi> for every theta in ``thetas``."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if len(evo.mode_weights) != state.mode_count:
        raise DimensionError(
            f"{len(evo.mode_weights)} mode weights for a {state.mode_count}-mode state"
        )
    if evo.generator is Generator.Collective:
        return _collective_curve(state, evo.k, evo.mode_weights[0], thetas, budget)
    return _per_mode_curve(state, evo.k, evo.mode_weights, thetas, budget)


def evolved_overlap(state: SuperpositionState, evo: EvolutionSpec, theta: float,
                    budget: SeriesBudget = DEFAULT_BUDGET) -> complex:
    """<psi| exp(i theta H) |psi> for a single theta."""
    return complex(overlap_curve(state, evo, [theta], budget)[0])
