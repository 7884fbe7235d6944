"""Ising coupling matrices: ideal power laws, Molmer-Sorensen mode sums, ring embedding.

All matrices are symmetric ``(L, L)`` float arrays with a zero diagonal, in
angular-frequency units. Sites are 1-based in the public API (``center``)
and 0-based inside arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ResonanceError

KHZ = 2.0 * np.pi * 1e3  # ordinary kHz -> rad/s


@dataclass(frozen=True)
class ModeSpectrum:
    """Motional modes of an ion chain.

    ``frequencies[m]`` is the angular frequency of mode ``m`` and
    ``participation[i, m]`` the normalized amplitude of ion ``i`` in it.
    """

    frequencies: np.ndarray
    participation: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.frequencies, dtype=float)
        b = np.asarray(self.participation, dtype=float)
        object.__setattr__(self, "frequencies", nu)
        object.__setattr__(self, "participation", b)
        if b.ndim != 2 or b.shape[0] != b.shape[1] or nu.shape != (b.shape[1],):
            raise ValueError("participation must be L x L with one frequency per mode")
        for axis, what in ((0, "column"), (1, "row")):
            norms = np.sum(b**2, axis=axis)
            if np.max(np.abs(norms - 1.0)) > 1e-10:
                raise ValueError(f"participation matrix {what}s are not unit norm")

    @property
    def L(self) -> int:
        return self.participation.shape[0]


@dataclass(frozen=True)
class DriveParams:
    """Global Rabi frequency, beatnote detuning and recoil frequency (rad/s)."""

    rabi: float
    detuning: float
    recoil: float


def check_couplings(J: np.ndarray) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise ValueError("coupling matrix must be square")
    if not np.all(np.isfinite(J)):
        raise ValueError("coupling matrix has non-finite entries")
    if np.any(np.diag(J) != 0.0):
        raise ValueError("coupling matrix must have a zero diagonal")
    if not np.allclose(J, J.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(J).max())):
        raise ValueError("coupling matrix must be symmetric")
    return J


def nearest_neighbor_scale(J: np.ndarray) -> float:
    """Mean nearest-neighbour coupling, the natural J0 of a measured matrix."""
    J = np.asarray(J, dtype=float)
    if J.shape[0] < 2:
        raise ValueError("need at least two sites")
    return float(np.mean(np.diag(J, 1)))


def power_law_couplings(L: int, J0: float, alpha: float) -> np.ndarray:
    """J_ij = J0 / |i - j|**alpha."""
    if L < 2:
        raise ValueError("L must be >= 2")
    if J0 <= 0:
        raise ValueError("J0 must be positive")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    d = np.abs(np.subtract.outer(np.arange(L), np.arange(L))).astype(float)
    J = np.zeros((L, L))
    off = d > 0
    J[off] = J0 / d[off] ** alpha
    return J


def _detuning_denominators(modes: ModeSpectrum, drive: DriveParams) -> np.ndarray:
    mu = drive.detuning
    scale = max(abs(mu), float(np.max(np.abs(modes.frequencies))), 1.0)
    for m, nu in enumerate(modes.frequencies):
        if abs(abs(mu) - abs(nu)) <= 1e-12 * scale:
            raise ResonanceError(m)
    return mu**2 - modes.frequencies**2


def ms_couplings(modes: ModeSpectrum, drive: DriveParams) -> np.ndarray:
    """Effective spin-spin couplings from off-resonant driving of the modes.

    J_ij = Omega^2 nu_R sum_m b_im b_jm / (mu^2 - nu_m^2)
    """
    denom = _detuning_denominators(modes, drive)
    b = modes.participation
    J = drive.rabi**2 * drive.recoil * (b / denom) @ b.T
    np.fill_diagonal(J, 0.0)
    return 0.5 * (J + J.T)


def ms_couplings_two_axes(
    modes_x: ModeSpectrum, modes_y: ModeSpectrum, drive_x: DriveParams, drive_y: DriveParams
) -> np.ndarray:
    """Sum of the mode-sum couplings from both transverse mode families."""
    if modes_x.L != modes_y.L:
        raise ValueError(f"mode spectra disagree on L ({modes_x.L} vs {modes_y.L})")
    return ms_couplings(modes_x, drive_x) + ms_couplings(modes_y, drive_y)


def fit_power_law(J: np.ndarray) -> tuple[float, float]:
    """Least-squares fit of log J_ij against log|i - j| pooled over all pairs.

    Returns ``(J0_eff, alpha_eff)``.
    """
    J = np.asarray(J, dtype=float)
    L = J.shape[0]
    if L < 3:
        raise ValueError("fit_power_law needs L >= 3")
    i, j = np.triu_indices(L, 1)
    values = J[i, j]
    if np.any(values <= 0):
        raise ValueError("fit_power_law requires strictly positive couplings")
    x = np.log(j - i)
    slope, intercept = np.polyfit(x, np.log(values), 1)
    return float(np.exp(intercept)), float(-slope)


def ring_embedding(J: np.ndarray, center: int | None = None) -> np.ndarray:
    """Translation-invariant coupling vector J(d), d = 1..L//2, read from one row.

    ``center`` is the 1-based reference ion, defaulting to the middle of the
    chain. Distances that run off the right end fall back to the mirrored
    pair J_{k-d, k}.
    """
    J = np.asarray(J, dtype=float)
    L = J.shape[0]
    if center is None:
        center = (L + 1) // 2
    if not 1 <= center <= L:
        raise IndexError(f"center {center} outside 1..{L}")
    k = center - 1
    out = np.empty(L // 2)
    for d in range(1, L // 2 + 1):
        if k + d < L:
            out[d - 1] = J[k, k + d]
        elif k - d >= 0:
            out[d - 1] = J[k - d, k]
        else:
            raise IndexError(f"no pair at distance {d} from site {center}")
    return out


def ring_couplings(Jring: np.ndarray, L: int) -> np.ndarray:
    """Full periodic coupling matrix defined by a ring-embedded vector."""
    Jring = np.asarray(Jring, dtype=float)
    if Jring.shape != (L // 2,):
        raise ValueError(f"ring vector must have length {L // 2}")
    d = np.abs(np.subtract.outer(np.arange(L), np.arange(L)))
    d = np.minimum(d, L - d)
    J = np.zeros((L, L))
    off = d > 0
    J[off] = Jring[d[off] - 1]
    return J


def load_mode_file(path: str | Path) -> ModeSpectrum:
    """Read a whitespace-separated mode file.

    First row: mode frequencies in kHz. Next L rows: participation matrix
    (rows = ions, columns = modes). Lines starting with ``#`` are ignored.
    """
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[0] != data.shape[1] + 1:
        raise ValueError(
            f"{path}: expected 1 frequency row plus L participation rows, got shape {data.shape}"
        )
    return ModeSpectrum(frequencies=data[0] * KHZ, participation=data[1:])


def save_mode_file(path: str | Path, modes: ModeSpectrum, header: str = "") -> None:
    rows = np.vstack([modes.frequencies / KHZ, modes.participation])
    np.savetxt(path, rows, fmt="%.12g", header=header)
