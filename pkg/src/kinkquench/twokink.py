"""Restricted two-domain-wall model on a ring.

Basis states |k, l> hold one up-domain of length l in a down background,
Fourier transformed over domain position with quasimomentum k = 2 pi m / L.
In that basis H is tridiagonal: V(l) on the diagonal and the domain-wall
hopping -2 B cos(k/2) between l and l +/- 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .couplings import power_law_couplings, ring_couplings, ring_embedding
from .errors import TruncationError

MAX_RING_L = 40
WEIGHT_TOL = 1e-8


@dataclass(frozen=True)
class ConfiningPotential:
    V: np.ndarray  # V[l - 1] for l = 1..l_max
    E_vac: float

    @property
    def excess(self) -> np.ndarray:
        """Wall-pair cost V(l) - E_vac."""
        return self.V - self.E_vac


def _check_ring(Jring: np.ndarray, L: int) -> np.ndarray:
    Jring = np.asarray(Jring, dtype=float)
    if L < 2:
        raise ValueError("ring needs L >= 2")
    if Jring.shape != (L // 2,):
        raise ValueError(f"ring coupling vector must have length L//2 = {L // 2}")
    return Jring


def confining_potential(Jring: np.ndarray, L: int, l_max: int | None = None) -> ConfiningPotential:
    """Classical Ising energy of a length-l domain on the ring, l = 1..l_max.

    Direct summation of -sum_{i<j} J_ij s_i s_j over all ring pairs.
    """
    Jring = _check_ring(Jring, L)
    if l_max is None:
        l_max = L - 1
    if not 1 <= l_max <= L - 1:
        raise ValueError(f"l_max must be in 1..{L - 1}")
    Jfull = ring_couplings(Jring, L)
    iu = np.triu_indices(L, 1)
    pair_J = Jfull[iu]
    E_vac = -float(pair_J.sum())
    V = np.empty(l_max)
    for l in range(1, l_max + 1):
        s = -np.ones(L)
        s[:l] = 1.0
        V[l - 1] = -float(np.sum(pair_J * s[iu[0]] * s[iu[1]]))
    return ConfiningPotential(V, E_vac)


def default_l_max(Jring: np.ndarray, L: int, window: float = 20.0) -> int:
    """Largest l reached from l = 1 before the wall-pair cost exceeds V(1) + window * J0.

    The scan stops at the first l above threshold, since V(l) = V(L - l) on
    the ring and a plain "largest l" would always return L - 1.
    """
    pot = confining_potential(Jring, L)
    J0 = abs(float(Jring[0])) if Jring[0] != 0 else 1.0
    limit = pot.excess[0] + window * J0
    above = np.flatnonzero(pot.excess > limit)
    return L - 1 if above.size == 0 else max(1, int(above[0]))


def quantized_momenta(L: int) -> np.ndarray:
    """The L ring momenta 2 pi m / L, m = -(L-1)//2 .. L//2, ascending."""
    m = np.arange(-((L - 1) // 2), L // 2 + 1)
    return 2.0 * np.pi * m / L


def _check_momentum(k: float, L: int) -> None:
    m = k * L / (2.0 * np.pi)
    if abs(m - round(m)) > 1e-9:
        raise ValueError(f"k={k} is not a ring momentum 2 pi m / {L}")


@dataclass(frozen=True)
class TwoKinkOperator:
    """Symmetric tridiagonal operator at fixed quasimomentum."""

    diagonal: np.ndarray
    offdiagonal: np.ndarray
    k: float
    L: int

    @property
    def dimension(self) -> int:
        return self.diagonal.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diagonal) + np.diag(self.offdiagonal, 1) + np.diag(self.offdiagonal, -1)

    def eigh(self, count: int | None = None):
        if self.dimension == 1:
            return self.diagonal.copy(), np.ones((1, 1))
        if count is None:
            return eigh_tridiagonal(self.diagonal, self.offdiagonal)
        count = min(count, self.dimension)
        return eigh_tridiagonal(self.diagonal, self.offdiagonal, select="i", select_range=(0, count - 1))

    def eigvals(self, count: int | None = None) -> np.ndarray:
        return self.eigh(count)[0]


def build_twokink_hamiltonian(
    Jring: np.ndarray,
    B: float,
    k: float,
    L: int,
    l_max: int | None = None,
    check_states: int = 3,
) -> TwoKinkOperator:
    """Tridiagonal two-kink Hamiltonian at quasimomentum ``k``.

    When ``l_max < L - 1`` the basis is truncated; the lowest
    ``check_states`` eigenvectors must then have weight below 1e-8 on
    l = l_max, otherwise :class:`TruncationError` is raised. With
    ``l_max=None`` the default cutoff is tried first and widened to
    L - 1 if it fails that check.
    """
    Jring = _check_ring(Jring, L)
    if L > MAX_RING_L:
        raise ValueError(f"two-kink model capped at L = {MAX_RING_L}")
    _check_momentum(k, L)
    if l_max is None:
        try:
            return build_twokink_hamiltonian(Jring, B, k, L, default_l_max(Jring, L), check_states)
        except TruncationError:
            # weakly confined: the full ring basis has no cutoff to violate
            l_max = L - 1
    pot = confining_potential(Jring, L, l_max)
    hop = -2.0 * B * np.cos(k / 2.0)
    op = TwoKinkOperator(pot.V.copy(), np.full(l_max - 1, hop), float(k), L)
    if l_max < L - 1 and check_states > 0 and B != 0.0:
        _, vecs = op.eigh(check_states)
        weight = float(np.max(vecs[-1] ** 2))
        if weight >= WEIGHT_TOL:
            raise TruncationError(weight, l_max)
    return op


def _even_sector(op: TwoKinkOperator) -> tuple[np.ndarray, np.ndarray]:
    """Tridiagonal block of the full ring operator that is even under l -> L - l."""
    d, t, n = op.diagonal, op.offdiagonal, op.dimension
    half = n // 2
    if n % 2 == 0:
        # partners l and n + 1 - l; the middle pair is joined by one hop
        diag = d[:half].copy()
        diag[-1] += t[half - 1]
        return diag, t[: half - 1].copy()
    # self-partnered middle level l = (n + 1) / 2
    diag = d[: half + 1].copy()
    off = t[:half].copy()
    off[-1] *= np.sqrt(2.0)
    return diag, off


def _levels(op: TwoKinkOperator, count: int) -> np.ndarray:
    """Lowest ``count`` levels, one per vacuum-partner pair in the full ring basis.

    With l_max = L - 1 the map l -> L - l exchanges the two ferromagnetic
    vacua and commutes with the operator, so every bound state appears
    twice up to a tunnelling splitting. Only the reflection-even block is
    diagonalized.
    """
    if op.dimension < op.L - 1 or op.dimension < 3:
        return op.eigvals(count)
    diag, off = _even_sector(op)
    even = TwoKinkOperator(diag, off, op.k, op.L)
    return even.eigvals(count)


def band_spectrum(
    Jring: np.ndarray, B: float, L: int, l_max: int | None = None, band_count: int = 3
) -> tuple[np.ndarray, np.ndarray]:
    """Lowest ``band_count`` eigenvalues at every ring momentum.

    Returns ``(k, E)`` with ``E[m, n]`` the n-th level at ``k[m]``.
    """
    ks = quantized_momenta(L)
    rows = []
    for k in ks:
        op = build_twokink_hamiltonian(Jring, B, k, L, l_max, check_states=band_count)
        rows.append(_levels(op, band_count))
    width = min(len(r) for r in rows)
    return ks, np.array([r[:width] for r in rows])


def lowest_gap(Jring: np.ndarray, B: float, L: int, l_max: int | None = None) -> float:
    """Lowest k = 0 two-kink level measured from the unshifted vacuum E_vac."""
    op = build_twokink_hamiltonian(Jring, B, 0.0, L, l_max)
    E_vac = confining_potential(Jring, L, 1).E_vac
    return float(op.eigvals(1)[0] - E_vac)


def gap_vs_size(
    J0: float,
    alpha: float | Callable[[int], np.ndarray],
    B: float,
    L_list: Sequence[int],
    J0_norm: float | None = None,
    center: int | None = None,
) -> np.ndarray:
    """Delta E_{0,1} / J0 predicted by the two-kink model for each chain length.

    ``alpha`` is either a power-law exponent or a callable returning the
    open-chain coupling matrix for a given L. Couplings are ring-embedded
    about the centre ion. Gaps are divided by ``J0_norm`` (default ``J0``),
    which lets a J0 band be expressed in the nominal J0 units.
    """
    J0_norm = J0 if J0_norm is None else J0_norm
    out = np.empty(len(L_list))
    for n, L in enumerate(L_list):
        if L < 4:
            raise ValueError("gap_vs_size needs L >= 4")
        J = alpha(L) if callable(alpha) else power_law_couplings(L, J0, alpha)
        Jring = ring_embedding(J, center)
        out[n] = lowest_gap(Jring, B, L) / J0_norm
    return out


def twokink_ladder(Jring: np.ndarray, B: float, L: int, count: int = 4) -> np.ndarray:
    """k = 0 levels relative to E_vac, with a leading 0 for the vacuum."""
    op = build_twokink_hamiltonian(Jring, B, 0.0, L)
    E_vac = confining_potential(Jring, L, 1).E_vac
    return np.concatenate([[0.0], _levels(op, count - 1) - E_vac])
