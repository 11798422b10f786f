"""Superpositions of multimode coherent / number product states.

A state is kept as a list of product terms ``sum_i c_i |f_i1>|f_i2>...|f_iN>``
and every bracket is evaluated factor by factor, so nothing ever allocates a
dense Fock array.  States built from identical single-mode pieces (the separable
families) remember those pieces and are only expanded into ``2**N`` terms when
a caller actually needs the flat term list.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import DimensionError, TermCountOverflow

EXPANSION_CAP = 20

# rows of the pair matrix materialised at once when contracting large states
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class Coherent:
    amplitude: complex

    def __post_init__(self):
        a = complex(self.amplitude)
        if not (math.isfinite(a.real) and math.isfinite(a.imag)):
            raise ValueError(f"coherent amplitude must be finite, got {self.amplitude!r}")
        object.__setattr__(self, "amplitude", a)

    @property
    def mean_photons(self) -> float:
        return abs(self.amplitude) ** 2


@dataclass(frozen=True)
class Number:
    occupation: int

    def __post_init__(self):
        n = self.occupation
        if isinstance(n, bool) or int(n) != n or n < 0:
            raise ValueError(f"occupation must be a nonnegative integer, got {n!r}")
        object.__setattr__(self, "occupation", int(n))

    @property
    def mean_photons(self) -> float:
        return float(self.occupation)


ModeFactor = Union[Coherent, Number]
ProductTerm = tuple  # tuple[ModeFactor, ...], one entry per mode

VACUUM = Number(0)


def number_coherent_amplitude(n: int, beta: complex) -> complex:
    """<n|beta> = exp(-|beta|^2/2) beta^n / sqrt(n!), via log-gamma."""
    if beta == 0:
        return 1.0 + 0j if n == 0 else 0j
    log_amp = -0.5 * abs(beta) ** 2 + n * cmath.log(beta) - 0.5 * math.lgamma(n + 1)
    return cmath.exp(log_amp)


def factor_bracket(bra: ModeFactor, ket: ModeFactor) -> complex:
    """Single-mode overlap <bra|ket>."""
    if isinstance(bra, Number) and isinstance(ket, Number):
        return 1.0 + 0j if bra.occupation == ket.occupation else 0j
    if isinstance(bra, Coherent) and isinstance(ket, Coherent):
        a, b = bra.amplitude, ket.amplitude
        return cmath.exp(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + a.conjugate() * b)
    if isinstance(bra, Number):
        return number_coherent_amplitude(bra.occupation, ket.amplitude)
    return number_coherent_amplitude(ket.occupation, bra.amplitude).conjugate()


def factor_number_bracket(bra: ModeFactor, ket: ModeFactor) -> complex:
    """Single-mode matrix element <bra|n|ket>."""
    if isinstance(bra, Coherent) and isinstance(ket, Coherent):
        return bra.amplitude.conjugate() * ket.amplitude * factor_bracket(bra, ket)
    n = bra.occupation if isinstance(bra, Number) else ket.occupation
    return n * factor_bracket(bra, ket)


class SuperpositionState:
    """Finite superposition of multimode product terms.

    Construct from ``(coefficient, factors)`` pairs.  Use :meth:`tensor` to
    build a product of independent single- or multi-mode states without
    expanding it.
    """

    def __init__(self, terms: Iterable[tuple[complex, Sequence[ModeFactor]]]):
        coeffs = []
        products = []
        for c, factors in terms:
            factors = tuple(factors)
            for f in factors:
                if not isinstance(f, (Coherent, Number)):
                    raise TypeError(f"mode factor must be Coherent or Number, got {f!r}")
            coeffs.append(complex(c))
            products.append(factors)
        if not products:
            raise ValueError("a state needs at least one term")
        lengths = {len(p) for p in products}
        if len(lengths) != 1 or 0 in lengths:
            raise DimensionError(f"all terms must share one nonzero mode count, got {sorted(lengths)}")
        self._coefficients = np.array(coeffs, dtype=complex)
        if not np.any(self._coefficients != 0):
            raise ValueError("a state needs at least one nonzero coefficient")
        if not np.all(np.isfinite(self._coefficients)):
            raise ValueError("coefficients must be finite")
        self._products = tuple(products)
        self.mode_count = lengths.pop()
        self.parts: tuple[SuperpositionState, ...] | None = None

    @classmethod
    def tensor(cls, parts: Sequence[SuperpositionState]) -> SuperpositionState:
        parts = tuple(parts)
        if not parts:
            raise ValueError("tensor product of zero states")
        flat = []
        for p in parts:
            flat.extend(p.parts if p.parts is not None else (p,))
        obj = cls.__new__(cls)
        obj._coefficients = None
        obj._products = None
        obj.mode_count = sum(p.mode_count for p in flat)
        obj.parts = tuple(flat)
        return obj

    def _expand(self):
        coeffs = np.ones(1, dtype=complex)
        products: list[tuple] = [()]
        for p in self.parts:
            coeffs = np.multiply.outer(coeffs, p.coefficients).ravel()
            products = [a + b for a in products for b in p.products]
        self._coefficients = coeffs
        self._products = tuple(products)

    @property
    def coefficients(self) -> np.ndarray:
        if self._coefficients is None:
            self._expand()
        return self._coefficients

    @property
    def products(self) -> tuple:
        if self._products is None:
            self._expand()
        return self._products

    @property
    def terms(self) -> list[tuple[complex, tuple]]:
        return list(zip(self.coefficients.tolist(), self.products))

    @property
    def term_count(self) -> int:
        if self.parts is not None:
            return math.prod(p.term_count for p in self.parts)
        return len(self._products)

    def scaled(self, factor: complex) -> SuperpositionState:
        if self.parts is not None:
            first = self.parts[0].scaled(factor)
            return SuperpositionState.tensor((first,) + self.parts[1:])
        return SuperpositionState(zip(self._coefficients * factor, self._products))

    def normalized(self) -> SuperpositionState:
        if self.parts is not None:
            return SuperpositionState.tensor([p.normalized() for p in self.parts])
        norm2 = inner_product(self, self).real
        if norm2 <= 0:
            raise ValueError("state has zero norm")
        return self.scaled(1 / math.sqrt(norm2))

    def __repr__(self):
        if self.parts is not None:
            return f"SuperpositionState.tensor({list(self.parts)!r})"
        return f"SuperpositionState({self.terms!r})"


# -- pairwise contraction -----------------------------------------------------

Bracket = Callable[[int, ModeFactor, ModeFactor], "complex | np.ndarray"]


def _mode_index(products: tuple, m: int) -> tuple[list, np.ndarray]:
    lookup: dict = {}
    idx = np.empty(len(products), dtype=np.intp)
    for i, p in enumerate(products):
        idx[i] = lookup.setdefault(p[m], len(lookup))
    return list(lookup), idx


def _mode_tables(a: SuperpositionState, b: SuperpositionState, bracket: Bracket, shape: tuple):
    tables = []
    for m in range(a.mode_count):
        ua, ia = _mode_index(a.products, m)
        ub, ib = _mode_index(b.products, m)
        table = np.empty((len(ua), len(ub)) + shape, dtype=complex)
        for r, fa in enumerate(ua):
            for s, fb in enumerate(ub):
                table[r, s] = bracket(m, fa, fb)
        tables.append((table, ia, ib))
    return tables


def pair_matrix(a: SuperpositionState, b: SuperpositionState, bracket: Bracket, shape: tuple = ()) -> np.ndarray:
    """Matrix of term-pair brackets ``prod_m bracket(m, a_im, b_jm)`` (coefficients excluded)."""
    _check_modes(a, b)
    tables = _mode_tables(a, b, bracket, shape)
    out = np.ones((len(a.products), len(b.products)) + shape, dtype=complex)
    for table, ia, ib in tables:
        out *= table[ia[:, None], ib[None, :]]
    return out


def contract(a: SuperpositionState, b: SuperpositionState, bracket: Bracket, shape: tuple = ()):
    """``sum_ij conj(a_i) b_j prod_m bracket(m, a_im, b_jm)``.

    ``bracket`` is called once per distinct (mode, bra factor, ket factor); it
    may return an array of ``shape`` to evaluate several parameter values at once.
    Rows are summed in index order, so the result is reproducible.
    """
    _check_modes(a, b)
    tables = _mode_tables(a, b, bracket, shape)
    ca = a.coefficients.conj()
    cb = b.coefficients
    width = len(cb) * max(1, math.prod(shape))
    rows = max(1, _CHUNK_ELEMENTS // width)
    total = np.zeros(shape, dtype=complex)
    for start in range(0, len(ca), rows):
        sl = slice(start, start + rows)
        block = np.ones((len(ca[sl]), len(cb)) + shape, dtype=complex)
        for table, ia, ib in tables:
            block *= table[ia[sl, None], ib[None, :]]
        total = total + np.einsum("i,j,ij...->...", ca[sl], cb, block)
    return total if shape else complex(total)


def _check_modes(a: SuperpositionState, b: SuperpositionState):
    if a.mode_count != b.mode_count:
        raise DimensionError(f"mode-count mismatch: {a.mode_count} vs {b.mode_count}")


def _aligned_parts(a: SuperpositionState, b: SuperpositionState):
    if a.parts is None or b.parts is None or len(a.parts) != len(b.parts):
        return None
    if any(p.mode_count != q.mode_count for p, q in zip(a.parts, b.parts)):
        return None
    return list(zip(a.parts, b.parts))


def inner_product(a: SuperpositionState, b: SuperpositionState) -> complex:
    """<a|b> for two states with the same mode count."""
    _check_modes(a, b)
    pairs = _aligned_parts(a, b)
    if pairs is not None:
        return complex(math.prod(inner_product(p, q) for p, q in pairs))
    return contract(a, b, lambda m, x, y: factor_bracket(x, y))


def gram_matrix(state: SuperpositionState) -> np.ndarray:
    """G_ij = <term_i|term_j> over the (expanded) term list."""
    return pair_matrix(state, state, lambda m, x, y: factor_bracket(x, y))


def _number_expectation(state: SuperpositionState) -> complex:
    if state.parts is not None:
        norms = [inner_product(p, p) for p in state.parts]
        total = 0j
        for i, p in enumerate(state.parts):
            rest = math.prod(norms[:i] + norms[i + 1:])
            total += _number_expectation(p) * rest
        return total
    total = 0j
    for mode in range(state.mode_count):
        def bracket(m, x, y, mode=mode):
            return factor_number_bracket(x, y) if m == mode else factor_bracket(x, y)
        total += contract(state, state, bracket)
    return total


def mean_photon_number(state: SuperpositionState) -> float:
    """Exact <sum_m n_m> for a unit-norm state."""
    value = _number_expectation(state)
    scale = max(1.0, abs(value.real))
    if abs(value.imag) > 1e-10 * scale:
        raise ArithmeticError(f"photon-number expectation has imaginary part {value.imag:g}")
    return max(0.0, value.real)


# -- builtin families ----------------------------------------------------------

class Family(str, enum.Enum):
    CoherentCat = "CoherentCat"
    CoherentEntangled = "CoherentEntangled"
    CoherentSeparable = "CoherentSeparable"
    NumberCat = "NumberCat"
    NumberEntangled = "NumberEntangled"
    NumberSeparable = "NumberSeparable"
    Noon = "Noon"

    @property
    def is_coherent(self) -> bool:
        return self.value.startswith("Coherent")

    @property
    def is_separable(self) -> bool:
        return self.value.endswith("Separable")

    @property
    def letter(self) -> str:
        """Table column letter (C, E or S); Noon reports as a cat."""
        if self is Family.Noon:
            return "C"
        return {"Cat": "C", "Entangled": "E", "Separable": "S"}[self.value.removeprefix("Coherent").removeprefix("Number")]

    @classmethod
    def parse(cls, text: str) -> Family:
        key = text.replace("-", "").replace("_", "").lower()
        for fam in cls:
            if fam.value.lower() == key:
                return fam
        raise ValueError(f"unknown family {text!r}; valid families: {', '.join(f.value for f in cls)}")


@dataclass(frozen=True)
class FamilySpec:
    family: Family
    N: int
    alpha: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "alpha", complex(self.alpha))
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if not (math.isfinite(self.alpha.real) and math.isfinite(self.alpha.imag)):
            raise ValueError("alpha must be finite")

    @property
    def mode_count(self) -> int:
        if self.family in (Family.CoherentCat, Family.NumberCat):
            return 1
        if self.family is Family.Noon:
            return 2
        return self.N


def _two_term(first: Sequence[ModeFactor], second: Sequence[ModeFactor]) -> SuperpositionState:
    return SuperpositionState([(1, first), (1, second)]).normalized()


def build_family(spec: FamilySpec, expansion_cap: int = EXPANSION_CAP) -> SuperpositionState:
    """Literal, exactly normalized state for one of the builtin families."""
    fam, N, alpha = spec.family, spec.N, spec.alpha
    if fam.is_coherent and alpha == 0:
        raise ValueError(f"{fam.value} needs |alpha| > 0")
    if fam.is_separable and N > expansion_cap:
        raise TermCountOverflow(
            f"term-count overflow: {fam.value} with N={N} expands to 2^{N} = {2 ** N} terms "
            f"(cap is N <= {expansion_cap})"
        )
    if fam is Family.CoherentCat:
        return _two_term((VACUUM,), (Coherent(math.sqrt(N) * alpha),))
    if fam is Family.CoherentEntangled:
        return _two_term((VACUUM,) * N, (Coherent(alpha),) * N)
    if fam is Family.CoherentSeparable:
        return SuperpositionState.tensor([_two_term((VACUUM,), (Coherent(alpha),))] * N)
    if fam is Family.NumberCat:
        return _two_term((VACUUM,), (Number(N),))
    if fam is Family.NumberEntangled:
        return _two_term((VACUUM,) * N, (Number(1),) * N)
    if fam is Family.NumberSeparable:
        return SuperpositionState.tensor([_two_term((VACUUM,), (Number(1),))] * N)
    return _two_term((VACUUM, Number(N)), (Number(N), VACUUM))


def nominal_mean_photon(spec: FamilySpec) -> float:
    """Energy label used by the closed forms: N|alpha|^2/2 or N/2."""
    if spec.family.is_coherent:
        return spec.N * abs(spec.alpha) ** 2 / 2
    return spec.N / 2
