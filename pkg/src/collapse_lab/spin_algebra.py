"""Electron spin-1/2 and photon polarization states and operators.

Units differ between the two systems: the electron J_z has eigenvalues
+-1/2, the photon spin operator S has eigenvalues +-1.

N-photon spaces are ordered tensor products of single-photon slots
(distinguishable, no bosonic symmetrization). Index bit ``N-1-k`` of a
basis index holds slot ``k``, with H = 0 and V = 1, which matches
``np.kron`` ordering.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import binom

from .qcore import STATE_TOL, Operator, StateVec, tensor_state

SQRT1_2 = 1 / math.sqrt(2)

ELECTRON_LABELS = ("+z", "-z")
PLUS_Z = StateVec(ELECTRON_LABELS, [1, 0])
MINUS_Z = StateVec(ELECTRON_LABELS, [0, 1])
PLUS_X = StateVec(ELECTRON_LABELS, [SQRT1_2, SQRT1_2])
MINUS_X = StateVec(ELECTRON_LABELS, [SQRT1_2, -SQRT1_2])
ELECTRON_STATES = {"+z": PLUS_Z, "-z": MINUS_Z, "+x": PLUS_X, "-x": MINUS_X}
JZ = Operator(ELECTRON_LABELS, np.diag([0.5, -0.5]), hermitian=True)

PHOTON_LABELS = ("H", "V")
H = StateVec(PHOTON_LABELS, [1, 0])
V = StateVec(PHOTON_LABELS, [0, 1])
R = StateVec(PHOTON_LABELS, [SQRT1_2, 1j * SQRT1_2])
L = StateVec(PHOTON_LABELS, [SQRT1_2, -1j * SQRT1_2])
S = Operator(PHOTON_LABELS, [[0, -1j], [1j, 0]], hermitian=True, unitary=True)

DENSE_MAX_PHOTONS = 12
FAST_MAX_PHOTONS = 10**6


def photon_labels(n_photons: int) -> tuple:
    if n_photons == 1:
        return PHOTON_LABELS
    return tuple(itertools.product("HV", repeat=n_photons))


def h_count(label) -> int:
    """Number of horizontally polarized slots in a photon basis label."""
    return sum(1 for c in label if c == "H")


def _check_dense(n_photons: int) -> None:
    if not 1 <= n_photons <= DENSE_MAX_PHOTONS:
        raise ValueError(
            f"dense photon operators need 1 <= N <= {DENSE_MAX_PHOTONS}, got {n_photons}; "
            "use fast_count_distribution / apply_total_spin for larger N"
        )


@lru_cache(maxsize=None)
def _h_counts(n_photons: int) -> np.ndarray:
    idx = np.arange(2**n_photons)
    ones = np.zeros_like(idx)
    for k in range(n_photons):
        ones += (idx >> k) & 1
    counts = n_photons - ones
    counts.setflags(write=False)
    return counts


def product_state(single: StateVec, n_photons: int) -> StateVec:
    psi = single
    for _ in range(n_photons - 1):
        psi = tensor_state(psi, single)
    return psi


def total_spin_op(n_photons: int) -> Operator:
    """Dense S_N = sum over slots of S acting on that slot."""
    _check_dense(n_photons)
    dim = 2**n_photons
    m = np.zeros((dim, dim), dtype=np.complex128)
    cols = np.arange(dim)
    for k in range(n_photons):
        bit = 1 << (n_photons - 1 - k)
        rows = cols ^ bit
        # S|H> = i|V>, S|V> = -i|H>
        m[rows, cols] = np.where(cols & bit, -1j, 1j)
    return Operator(photon_labels(n_photons), m, hermitian=True)


def apply_total_spin(amps: np.ndarray, n_photons: int) -> np.ndarray:
    """S_N applied to a raw amplitude vector without building the matrix."""
    amps = np.asarray(amps, dtype=np.complex128)
    idx = np.arange(amps.shape[0])
    out = np.zeros_like(amps)
    for k in range(n_photons):
        bit = 1 << (n_photons - 1 - k)
        src = idx ^ bit
        out += np.where(idx & bit, 1j, -1j) * amps[src]
    return out


def fixed_count_projector(n_photons: int, n_h: int) -> Operator:
    _check_dense(n_photons)
    if not 0 <= n_h <= n_photons:
        raise ValueError(f"H count must lie in [0, {n_photons}], got {n_h}")
    diag = (_h_counts(n_photons) == n_h).astype(float)
    return Operator(photon_labels(n_photons), np.diag(diag), hermitian=True)


def fixed_count_projectors(n_photons: int) -> list[Operator]:
    return [fixed_count_projector(n_photons, n) for n in range(n_photons + 1)]


def _n_photons_of(psi: StateVec) -> int:
    n = int(round(math.log2(psi.dim)))
    if 2**n != psi.dim or psi.labels != photon_labels(n):
        raise ValueError("state is not over an N-photon H/V product basis")
    return n


@dataclass(frozen=True)
class CountShiftRecord:
    """How S_N redistributes a fixed-count state over H counts."""

    n_photons: int
    n_h: int
    weight_by_count: dict
    overlap: complex

    @property
    def counts(self) -> set:
        return {c for c, w in self.weight_by_count.items() if w > STATE_TOL**2}


def sn_maps_count_shift(psi: StateVec) -> CountShiftRecord:
    """Check that S_N moves a count-n state onto counts n-1 and n+1 only,
    and hence that <psi|S_N|psi> vanishes."""
    n_photons = _n_photons_of(psi)
    counts = _h_counts(n_photons)
    present = set(counts[np.abs(psi.amps) > STATE_TOL].tolist())
    if len(present) != 1:
        raise ValueError(f"state is not a fixed-count state (H counts {sorted(present)})")
    n_h = present.pop()
    image = apply_total_spin(psi.amps, n_photons)
    weights = {}
    for c in range(n_photons + 1):
        w = float(np.sum(np.abs(image[counts == c]) ** 2))
        if w > 0.0:
            weights[c] = w
    record = CountShiftRecord(n_photons, n_h, weights, complex(np.vdot(psi.amps, image)))
    stray = record.counts - {n_h - 1, n_h + 1}
    if stray:
        raise ArithmeticError(f"S_N image has weight on counts {sorted(stray)}")
    if abs(record.overlap) > STATE_TOL:
        raise ArithmeticError(f"<psi|S_N|psi> = {record.overlap!r} is not zero")
    return record


def count_log_probabilities(n_photons: int) -> np.ndarray:
    """log P(n) for the H count of |R>^N, i.e. Binomial(N, 1/2)."""
    if not 1 <= n_photons <= FAST_MAX_PHOTONS:
        raise ValueError(f"N must lie in [1, {FAST_MAX_PHOTONS}], got {n_photons}")
    return binom.logpmf(np.arange(n_photons + 1), n_photons, 0.5)


def fast_count_distribution(n_photons: int) -> np.ndarray:
    """P(n) for the H count of |R>^N without touching 2^N amplitudes.

    Exact integer arithmetic up to N = 1000, scipy's binomial pmf beyond
    (far tails underflow to 0 there; use count_log_probabilities for them).
    """
    if not 1 <= n_photons <= FAST_MAX_PHOTONS:
        raise ValueError(f"N must lie in [1, {FAST_MAX_PHOTONS}], got {n_photons}")
    if n_photons <= 1000:
        total = 2**n_photons
        return np.array([math.comb(n_photons, n) / total for n in range(n_photons + 1)])
    return binom.pmf(np.arange(n_photons + 1), n_photons, 0.5)
