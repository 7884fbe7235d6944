"""Long-range transverse-field Ising Hamiltonian.

    H = sign * ( -sum_{i<j} J_ij X_i X_j - B sum_i Z_i )

with hbar = 1. ``sign = -1`` represents the antiferromagnetic native
Hamiltonian -H used by the equivalence check; everything else uses +1.

The matrix-free product is the primary representation. Dense matrices and
full spectra exist for L <= 14 as oracles; they are block-diagonalized in
the two sectors of the parity operator prod_i Z_i, which H conserves.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .couplings import check_couplings, nearest_neighbor_scale
from .errors import CapabilityError
from .spin import basis_bits, check_normalized, site_count

DENSE_MAX_L = 14


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    J: np.ndarray
    B: float
    sign: int = 1
    J0: float | None = None

    def __post_init__(self):
        J = check_couplings(self.J)
        J.setflags(write=False)
        object.__setattr__(self, "J", J)
        if self.B < 0:
            raise ValueError("B must be non-negative; use sign=-1 for the mirrored Hamiltonian")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.J0 is None:
            scale = nearest_neighbor_scale(J) if self.L >= 2 else 0.0
            object.__setattr__(self, "J0", scale if scale > 0 else 1.0)

    @property
    def L(self) -> int:
        return self.J.shape[0]

    def negated(self) -> "HamiltonianSpec":
        return HamiltonianSpec(self.J, self.B, -self.sign, self.J0)

    def with_field(self, B: float) -> "HamiltonianSpec":
        return HamiltonianSpec(self.J, B, self.sign, self.J0)

    @cached_property
    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.J).tobytes())
        h.update(np.array([self.B, self.sign, self.J0], dtype=float).tobytes())
        return h.hexdigest()[:16]

    @cached_property
    def _diagonal(self) -> np.ndarray:
        bits = basis_bits(self.L)
        magnetization = 2 * bits.sum(axis=1) - self.L
        return -self.B * magnetization.astype(float)

    @cached_property
    def _pair_terms(self) -> tuple[tuple[int, float], ...]:
        i, j = np.triu_indices(self.L, 1)
        return tuple(
            ((1 << a) | (1 << b), -float(self.J[a, b]))
            for a, b in zip(i, j)
            if self.J[a, b] != 0.0
        )


def apply_hamiltonian(spec: HamiltonianSpec, state: np.ndarray) -> np.ndarray:
    """H|psi> without building a matrix.

    In the z basis the field term is diagonal, -B (n_up - n_down), and each
    X_i X_j flips bits i and j.
    """
    if state.shape != (1 << spec.L,):
        raise ValueError(f"state has shape {state.shape}, expected ({1 << spec.L},)")
    idx = np.arange(state.shape[0])
    out = spec._diagonal * state
    for mask, weight in spec._pair_terms:
        out += weight * state[idx ^ mask]
    if spec.sign < 0:
        out = -out
    return out


def parity_sector(L: int, parity: int) -> np.ndarray:
    """Basis indices with prod_i Z_i equal to ``parity``."""
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")
    n_down = L - basis_bits(L).sum(axis=1)
    return np.flatnonzero((n_down % 2 == 0) == (parity > 0))


def materialize_dense(spec: HamiltonianSpec, parity: int | None = None) -> np.ndarray:
    """Dense real-symmetric H, optionally restricted to one parity block."""
    L = spec.L
    if L > DENSE_MAX_L:
        raise CapabilityError(f"dense Hamiltonian limited to L <= {DENSE_MAX_L} (got {L})")
    if parity is None:
        rows = np.arange(1 << L)
    else:
        rows = parity_sector(L, parity)
    position = np.full(1 << L, -1)
    position[rows] = np.arange(rows.size)
    n = rows.size
    H = np.zeros((n, n))
    H[np.arange(n), np.arange(n)] = spec._diagonal[rows]
    for mask, weight in spec._pair_terms:
        H[np.arange(n), position[rows ^ mask]] += weight
    return spec.sign * H


@dataclass(frozen=True)
class ExactSpectrum:
    """Full eigendecomposition, stored per parity sector."""

    L: int
    J0: float
    indices: tuple[np.ndarray, np.ndarray]
    energies: tuple[np.ndarray, np.ndarray]
    vectors: tuple[np.ndarray, np.ndarray]

    def all_energies(self) -> np.ndarray:
        return np.sort(np.concatenate(self.energies))

    def coefficients(self, state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Eigenbasis amplitudes of ``state`` in each sector."""
        return tuple(V.T @ state[idx] for V, idx in zip(self.vectors, self.indices))

    def eigenvector(self, sector: int, n: int) -> np.ndarray:
        psi = np.zeros(1 << self.L, dtype=complex)
        psi[self.indices[sector]] = self.vectors[sector][:, n]
        return psi


def exact_spectrum(spec: HamiltonianSpec) -> ExactSpectrum:
    idx, evals, evecs = [], [], []
    for parity in (1, -1):
        rows = parity_sector(spec.L, parity)
        E, V = np.linalg.eigh(materialize_dense(spec, parity))
        idx.append(rows)
        evals.append(E)
        evecs.append(V)
    return ExactSpectrum(spec.L, spec.J0, tuple(idx), tuple(evals), tuple(evecs))


def low_spectrum(spec: HamiltonianSpec, n: int, return_states: bool = False):
    """The ``n`` smallest eigenvalues, ascending.

    Uses dense diagonalization of both parity blocks (L <= 14). With
    ``return_states`` the eigenvectors come back as columns of a
    ``(2**L, n)`` array.
    """
    if n < 1 or n > (1 << spec.L):
        raise ValueError(f"n must be in 1..{1 << spec.L}")
    es = exact_spectrum(spec)
    labelled = [(E, s, k) for s in (0, 1) for k, E in enumerate(es.energies[s])]
    labelled.sort(key=lambda x: x[0])
    chosen = labelled[:n]
    energies = np.array([c[0] for c in chosen])
    if not return_states:
        return energies
    states = np.column_stack([es.eigenvector(s, k) for _, s, k in chosen])
    return energies, states


def energy_expectation(spec: HamiltonianSpec, state: np.ndarray) -> float:
    value = np.vdot(state, apply_hamiltonian(spec, state))
    scale = max(1.0, abs(value))
    if abs(value.imag) > 1e-10 * scale:
        raise ArithmeticError(f"<H> has imaginary part {value.imag}")
    return float(value.real)


@dataclass(frozen=True)
class Transition:
    gap: float
    weight: float
    E_from: float
    E_to: float


def overlap_level(spectrum: ExactSpectrum, state: np.ndarray) -> tuple[float, int, int]:
    """Energy (sector, index) of the eigenstate with the largest overlap with ``state``."""
    best = (-1.0, 0, 0)
    for s, c in enumerate(spectrum.coefficients(state)):
        k = int(np.argmax(np.abs(c)))
        if abs(c[k]) ** 2 > best[0]:
            best = (abs(c[k]) ** 2, s, k)
    _, s, k = best
    return float(spectrum.energies[s][k]), s, k


def exact_transition(
    spectrum: ExactSpectrum, state: np.ndarray, site: int, min_gap: float | None = None
) -> Transition:
    """Dominant upward frequency in the exact <Z_site(t)> signal.

    The signal is sum_{m,n} c_m* c_n <m|Z|n> exp(i(E_m - E_n)t). Starting
    from the eigenstate that best overlaps ``state``, this returns the
    transition to a higher level (gap > ``min_gap``) carrying the largest
    amplitude 2|c_r c_n Z_rn|. Nearly degenerate beats below ``min_gap``
    (default 0.5 J0) are not gaps and are skipped.
    """
    if min_gap is None:
        min_gap = 0.5 * spectrum.J0
    check_normalized(state, 1e-10)
    L = site_count(state)
    if not 1 <= site <= L:
        raise IndexError(f"site {site} outside 1..{L}")
    E_ref, s, r = overlap_level(spectrum, state)
    c = spectrum.coefficients(state)[s]
    V = spectrum.vectors[s]
    z = np.where(spectrum.indices[s] & (1 << (site - 1)), 1.0, -1.0)
    row = (V[:, r] * z) @ V
    E = spectrum.energies[s]
    weight = 2.0 * np.abs(c[r] * c * row)
    weight[E <= E_ref + min_gap] = 0.0
    n = int(np.argmax(weight))
    if weight[n] == 0.0:
        raise ValueError("no upward transition carries weight for this probe")
    return Transition(float(E[n] - E_ref), float(weight[n]), E_ref, float(E[n]))


def parity_operator(L: int) -> np.ndarray:
    n_down = L - basis_bits(L).sum(axis=1)
    return np.where(n_down % 2 == 0, 1.0, -1.0)


__all__ = [
    "HamiltonianSpec",
    "apply_hamiltonian",
    "materialize_dense",
    "low_spectrum",
    "energy_expectation",
    "exact_spectrum",
    "exact_transition",
    "overlap_level",
    "parity_sector",
    "parity_operator",
    "ExactSpectrum",
    "Transition",
]
