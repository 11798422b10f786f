import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metroscope.errors import DimensionError, TruncationOverflow
from metroscope.overlap import (
    EvolutionSpec,
    Generator,
    SeriesBudget,
    collective_factor,
    evolved_overlap,
    overlap_curve,
    single_mode_factor,
    truncation_index,
)
from metroscope.states import Coherent, Family, FamilySpec, Number, SuperpositionState, build_family

from oracles import dense_overlap, fock_sum_single, fock_sum_two_mode_collective

EPS = 1e-12
BUDGET = SeriesBudget(EPS)
KS = [0.5, 1.0, 2.0, 3.0]


def spec_for(fam, N, alpha):
    return FamilySpec(fam, N, alpha if fam.is_coherent else 0)


def test_number_factor_exact_phase():
    v = single_mode_factor(Number(3), Number(3), 2, 0.1)
    assert v == pytest.approx(cmath.exp(0.9j), abs=1e-15)
    assert single_mode_factor(Number(3), Number(2), 2, 0.1) == 0


@pytest.mark.parametrize("theta", [0.001, 0.1, 1.0, 2.5, math.pi])
def test_coherent_factor_k1_closed_form(theta):
    v = single_mode_factor(Coherent(2), Coherent(2), 1, theta, BUDGET)
    assert v == pytest.approx(cmath.exp(4 * (cmath.exp(1j * theta) - 1)), abs=EPS)


@pytest.mark.parametrize("f", [Number(0), Number(5), Coherent(1.5 - 0.5j), Coherent(0)])
def test_identity_evolution(f):
    assert single_mode_factor(f, f, 2.0, 0.0) == pytest.approx(1, abs=1e-15)


def test_number_coherent_cross_term():
    assert single_mode_factor(Number(1), Coherent(1), 1, 0) == pytest.approx(0.6065306597, abs=1e-10)
    a = single_mode_factor(Number(2), Coherent(0.8 + 0.3j), 2, 0.4)
    b = single_mode_factor(Coherent(0.8 + 0.3j), Number(2), 2, -0.4)
    assert a == pytest.approx(b.conjugate(), abs=1e-15)


def test_vacuum_with_fractional_order():
    # 0**k is 0, so the vacuum never picks up phase
    assert single_mode_factor(Number(0), Number(0), 0.5, 1.3) == 1
    assert single_mode_factor(Number(0), Coherent(1.0), 0.5, 1.3) == pytest.approx(math.exp(-0.5), abs=1e-15)


@pytest.mark.parametrize("alpha2", [1, 4, 9])
@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("theta", [0.001, 0.1, 1.0])
def test_series_matches_fock_sum(alpha2, k, theta):
    alpha = math.sqrt(alpha2)
    got = single_mode_factor(Coherent(alpha), Coherent(alpha), k, theta, BUDGET)
    assert got == pytest.approx(fock_sum_single(alpha, k, theta, 200), abs=1e-10)


def test_off_diagonal_coherent_factor_against_dense():
    s_bra = SuperpositionState([(1, (Coherent(1.1 + 0.2j),))])
    s_ket = SuperpositionState([(1, (Coherent(-0.4 + 0.9j),))])
    both = SuperpositionState([(1, (Coherent(1.1 + 0.2j),)), (1, (Coherent(-0.4 + 0.9j),))])
    for k in KS:
        evo = EvolutionSpec.per_mode(k, 1)
        expected = dense_overlap(both, k, [1.0], 0.37, 60)
        assert evolved_overlap(both, evo, 0.37, BUDGET) == pytest.approx(expected, abs=1e-11)
    assert s_bra.mode_count == s_ket.mode_count == 1


def test_collective_number_terms():
    t = (Number(1), Number(1))
    assert collective_factor(t, t, 2, 0.3) == pytest.approx(cmath.exp(0.3j * 4), abs=1e-15)


def test_collective_mismatched_numbers_vanish():
    assert collective_factor((Number(1), Number(2)), (Number(2), Number(1)), 2, 0.3) == 0


def test_collective_two_mode_brute_force():
    t = (Coherent(1.0), Coherent(1.0))
    got = collective_factor(t, t, 2, 0.01, BUDGET)
    assert got == pytest.approx(fock_sum_two_mode_collective(1.0, 2, 0.01, 40), abs=1e-9)


@pytest.mark.parametrize("bra,ket", [
    ((Coherent(1.2), Number(2)), (Coherent(0.5j), Number(2))),
    ((Number(1), Coherent(0.8)), (Coherent(0.3), Coherent(0.8 - 0.2j))),
    ((Coherent(1.0), Coherent(0.7)), (Coherent(0.9), Coherent(-0.3))),
])
def test_collective_k1_is_product_of_single_modes(bra, ket):
    theta = 0.45
    prod = np.prod([single_mode_factor(a, b, 1, theta, BUDGET) for a, b in zip(bra, ket)])
    assert collective_factor(bra, ket, 1, theta, BUDGET) == pytest.approx(prod, abs=2 * EPS)


def test_collective_mixed_terms_against_dense():
    s = SuperpositionState([
        (0.7, (Coherent(0.9), Number(1))),
        (0.5j, (Number(2), Coherent(0.6 - 0.3j))),
        (0.4, (Coherent(-0.5j), Coherent(1.1))),
    ]).normalized()
    for k in [0.5, 2.0, 3.0]:
        evo = EvolutionSpec.collective(k, 2)
        expected = dense_overlap(s, k, [1.0, 1.0], 0.21, 45, collective=True)
        assert evolved_overlap(s, evo, 0.21, BUDGET) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("fam", list(Family))
def test_theta_zero_is_identity(fam):
    s = build_family(spec_for(fam, 3, 2.0))
    for evo in (EvolutionSpec.per_mode(2, s.mode_count), EvolutionSpec.collective(2, s.mode_count)):
        assert evolved_overlap(s, evo, 0.0, BUDGET) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("theta", [0.01, 0.1, 1.0])
def test_single_coherent_state_k1(theta):
    s = SuperpositionState([(1, (Coherent(3),))])
    got = evolved_overlap(s, EvolutionSpec.per_mode(1, 1), theta, BUDGET)
    assert got == pytest.approx(cmath.exp(9 * (cmath.exp(1j * theta) - 1)), abs=10 * EPS)


def test_number_cat_quarter_turn():
    s = build_family(FamilySpec(Family.NumberCat, 2))
    assert evolved_overlap(s, EvolutionSpec.per_mode(2, 1), math.pi / 4) == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("fam", [Family.CoherentEntangled, Family.CoherentSeparable, Family.CoherentCat, Family.Noon])
@pytest.mark.parametrize("k", [0.5, 2.0])
def test_per_mode_overlap_against_dense(fam, k):
    s = build_family(spec_for(fam, 2, 1.2 - 0.3j))
    weights = [1.0, 0.4][: s.mode_count]
    evo = EvolutionSpec.per_mode(k, s.mode_count, weights)
    expected = dense_overlap(s, k, weights, 0.33, 40)
    assert evolved_overlap(s, evo, 0.33, BUDGET) == pytest.approx(expected, abs=1e-10)


def test_weight_length_mismatch():
    s = build_family(FamilySpec(Family.NumberEntangled, 3))
    with pytest.raises(DimensionError):
        evolved_overlap(s, EvolutionSpec.per_mode(1, 2), 0.1)


def test_evolution_spec_validation():
    with pytest.raises(ValueError):
        EvolutionSpec(Generator.PerMode, 0, (1.0,))
    with pytest.raises(ValueError):
        EvolutionSpec(Generator.PerMode, 1, (1.5,))
    with pytest.raises(ValueError):
        EvolutionSpec(Generator.Collective, 1, (1.0, 0.5))


def test_budget_validation():
    with pytest.raises(ValueError):
        SeriesBudget(0)
    with pytest.raises(ValueError):
        SeriesBudget(1e-12, hard_cap=8)


def test_truncation_overflow_reports_bound():
    with pytest.raises(TruncationOverflow) as info:
        single_mode_factor(Coherent(30), Coherent(30), 1, 0.1, SeriesBudget(1e-12, hard_cap=100))
    assert info.value.achieved_bound > 1e-12


def test_truncation_index_is_a_valid_bound():
    # compare the certified cut against the actual remainder of e^{-r} sum r^j/j!
    from scipy.stats import poisson
    for r in [0.5, 4.0, 30.0, 250.0]:
        J = truncation_index(r, -r, 1e-12, 100_000)
        assert poisson.sf(J, r) <= 1e-12
        assert J >= 1


def test_tensor_path_equals_flat_path():
    s = build_family(FamilySpec(Family.CoherentSeparable, 4, 1.1))
    flat = SuperpositionState(s.terms)
    evo = EvolutionSpec.per_mode(2, 4, [1.0, 0.5, 0.25, 0.0])
    thetas = np.linspace(0, 2, 7)
    np.testing.assert_allclose(overlap_curve(s, evo, thetas), overlap_curve(flat, evo, thetas), atol=1e-12)


def test_curve_matches_pointwise():
    s = build_family(FamilySpec(Family.CoherentEntangled, 3, 1.5))
    evo = EvolutionSpec.per_mode(2, 3)
    thetas = [0.05, 0.2, 0.9]
    curve = overlap_curve(s, evo, thetas)
    for t, v in zip(thetas, curve):
        assert v == pytest.approx(evolved_overlap(s, evo, t), abs=1e-15)


# -- properties over builtin families ------------------------------------------

families = st.sampled_from(list(Family))
orders = st.sampled_from(KS)


@settings(max_examples=80, deadline=None)
@given(families, st.integers(1, 8), st.floats(0.5, 8.0), orders, st.floats(0, 2 * math.pi))
def test_overlap_modulus_bounded(fam, N, alpha, k, theta):
    if fam.is_separable:
        N = min(N, 6)
    s = build_family(spec_for(fam, N, alpha))
    for evo in (EvolutionSpec.per_mode(k, s.mode_count), EvolutionSpec.collective(k, s.mode_count)):
        if evo.generator is Generator.Collective and fam.is_separable and N > 4:
            continue
        assert abs(evolved_overlap(s, evo, theta, BUDGET)) <= 1 + 10 * EPS


@settings(max_examples=60, deadline=None)
@given(families, st.integers(1, 5), st.floats(0.5, 4.0), orders, st.floats(0.001, 3.0))
def test_time_reversal_conjugates(fam, N, alpha, k, theta):
    s = build_family(spec_for(fam, N, alpha))
    evo = EvolutionSpec.per_mode(k, s.mode_count)
    fwd = evolved_overlap(s, evo, theta, BUDGET)
    back = evolved_overlap(s, evo, -theta, BUDGET)
    assert back == pytest.approx(fwd.conjugate(), abs=2 * EPS)


@settings(max_examples=60, deadline=None)
@given(families, st.integers(1, 4), st.floats(0.5, 4.0), st.floats(0.001, 3.0))
def test_k1_generators_agree(fam, N, alpha, theta):
    s = build_family(spec_for(fam, N, alpha))
    a = evolved_overlap(s, EvolutionSpec.per_mode(1, s.mode_count), theta, BUDGET)
    b = evolved_overlap(s, EvolutionSpec.collective(1, s.mode_count), theta, BUDGET)
    assert a == pytest.approx(b, abs=4 * EPS * max(1, s.term_count))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([Family.CoherentCat, Family.NumberCat]), st.integers(1, 8),
       st.floats(0.5, 6.0), orders, st.floats(0.001, 3.0))
def test_single_mode_generators_agree(fam, N, alpha, k, theta):
    s = build_family(spec_for(fam, N, alpha))
    a = evolved_overlap(s, EvolutionSpec.per_mode(k, 1), theta, BUDGET)
    b = evolved_overlap(s, EvolutionSpec.collective(k, 1), theta, BUDGET)
    assert a == pytest.approx(b, abs=2 * EPS)


@settings(max_examples=40, deadline=None)
@given(families, st.integers(1, 4), st.floats(0.5, 6.0), orders, st.floats(0.001, 2.0))
def test_halving_epsilon_moves_little(fam, N, alpha, k, theta):
    s = build_family(spec_for(fam, N, alpha))
    evo = EvolutionSpec.per_mode(k, s.mode_count)
    eps = 1e-10
    a = evolved_overlap(s, evo, theta, SeriesBudget(eps))
    b = evolved_overlap(s, evo, theta, SeriesBudget(eps / 2))
    pairs = s.term_count ** 2
    assert abs(a - b) <= eps * pairs * s.mode_count
