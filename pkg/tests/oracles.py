"""Independent reference computations built from truncated dense Fock vectors.

Amplitudes come from the recursion c_n = c_{n-1} alpha / sqrt(n), never from the
log-gamma route the library uses.
"""

import itertools

import numpy as np

from metroscope.states import Coherent, Number


def coherent_vector(alpha, cutoff):
    c = np.empty(cutoff + 1, dtype=complex)
    c[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, cutoff + 1):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    return c


def factor_vector(f, cutoff):
    if isinstance(f, Coherent):
        return coherent_vector(f.amplitude, cutoff)
    v = np.zeros(cutoff + 1, dtype=complex)
    v[f.occupation] = 1
    return v


def dense_state(state, cutoff):
    """Full tensor-product vector of a small state, shape (cutoff+1,)*modes."""
    psi = 0
    for c, factors in state.terms:
        vec = np.array(c, dtype=complex)
        for f in factors:
            vec = np.multiply.outer(vec, factor_vector(f, cutoff))
        psi = psi + vec
    return psi


def occupations(modes, cutoff):
    grids = np.meshgrid(*[np.arange(cutoff + 1)] * modes, indexing="ij")
    return grids


def dense_overlap(state, k, weights, theta, cutoff, collective=False):
    psi = dense_state(state, cutoff)
    ns = occupations(state.mode_count, cutoff)
    if collective:
        H = sum(ns).astype(float) ** k * weights[0]
    else:
        H = sum(w * n.astype(float) ** k for w, n in zip(weights, ns))
    return np.vdot(psi, np.exp(1j * theta * H) * psi)


def dense_mean_photon(state, cutoff):
    psi = dense_state(state, cutoff)
    ns = occupations(state.mode_count, cutoff)
    return float(np.vdot(psi, sum(ns) * psi).real)


def fock_sum_single(alpha, k, theta, cutoff=200):
    c = coherent_vector(alpha, cutoff)
    n = np.arange(cutoff + 1, dtype=float)
    return np.sum(np.abs(c) ** 2 * np.exp(1j * theta * n ** k))


def fock_sum_two_mode_collective(alpha, k, theta, cutoff=40):
    p = np.abs(coherent_vector(alpha, cutoff)) ** 2
    total = 0j
    for n1, n2 in itertools.product(range(cutoff + 1), repeat=2):
        total += p[n1] * p[n2] * np.exp(1j * theta * float(n1 + n2) ** k)
    return total


def number_family_d(letter, N, k, theta):
    """Exact number-family distinguishabilities written out by hand."""
    theta = np.asarray(theta, dtype=float)
    if letter == "C":
        return np.abs((1 + np.exp(1j * theta * N ** k)) / 2) ** 2
    if letter == "E":
        return np.abs((1 + np.exp(1j * theta * N)) / 2) ** 2
    return np.abs((1 + np.exp(1j * theta)) / 2) ** (2 * N)


__all__ = [
    "Coherent", "Number", "coherent_vector", "dense_state", "dense_overlap", "dense_mean_photon",
    "fock_sum_single", "fock_sum_two_mode_collective", "number_family_d",
]
