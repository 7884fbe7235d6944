"""Symmetric bit-flip readout errors: the analytic channel and shot sampling.

Each measured spin is flipped independently with probability p after the
projective measurement. A flip negates that spin's contribution to any
sigma string along the measured axis, so an n-site string expectation
shrinks by (1 - 2p)**n.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .couplings import DriveParams, ModeSpectrum, _detuning_denominators
from .spin import Axis, check_normalized, global_rotation, site_count


@dataclass(frozen=True)
class BitFlipModel:
    """Flip probability, either one number for all ions or one per ion."""

    p: float | tuple[float, ...]

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.p, dtype=float))
        if values.ndim != 1 or values.size == 0:
            raise ValueError("p must be a scalar or a 1-D list")
        if np.any(values < 0) or np.any(values > 1) or not np.all(np.isfinite(values)):
            raise ValueError("flip probabilities must lie in [0, 1]")
        if np.ndim(self.p) > 0:
            object.__setattr__(self, "p", tuple(float(v) for v in values))
        else:
            object.__setattr__(self, "p", float(values[0]))

    def per_ion(self, L: int) -> np.ndarray:
        if isinstance(self.p, tuple):
            if len(self.p) != L:
                raise ValueError(f"model has {len(self.p)} per-ion probabilities, chain has {L}")
            return np.array(self.p)
        return np.full(L, self.p)


def estimate_flip_probability(modes: ModeSpectrum, drive: DriveParams) -> np.ndarray:
    """p_i = sum_m (eta_im Omega / delta_m)**2 with eta_im = b_im sqrt(nu_R / nu_m).

    delta_m = mu - nu_m is the beatnote detuning from mode m.
    """
    _detuning_denominators(modes, drive)  # raises on resonance
    nu = modes.frequencies
    eta = modes.participation * np.sqrt(drive.recoil / nu)
    delta = drive.detuning - nu
    return np.sum((eta * drive.rabi / delta) ** 2, axis=1)


def degrade_correlator(value, n: int, p: float):
    """Expectation of an n-site sigma string after the flip channel."""
    if not 0.0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 1/2]")
    if n < 0:
        raise ValueError("n must be non-negative")
    return value * (1.0 - 2.0 * p) ** n


def degraded_wall_profile(xx: np.ndarray, p: float | Sequence[float]) -> np.ndarray:
    """Bond wall occupations (1 - <X_j X_j+1>)/2 seen through the channel.

    ``xx`` holds the exact nearest-neighbour correlators; ``p`` is a scalar
    or one probability per ion.
    """
    xx = np.asarray(xx, dtype=float)
    p_ion = BitFlipModel(p if np.ndim(p) == 0 else tuple(p)).per_ion(xx.size + 1)
    shrink = 1.0 - 2.0 * p_ion
    return (1.0 - shrink[:-1] * shrink[1:] * xx) / 2.0


def derive_seed(seed: int, worker: int = 0) -> np.random.SeedSequence:
    """Independent, reproducible stream for one worker."""
    if seed < 0 or worker < 0:
        raise ValueError("seed and worker index must be non-negative")
    return np.random.SeedSequence([int(seed), int(worker)])


def sample_shots(
    state: np.ndarray,
    axis: Axis | str,
    shots: int,
    p: float | Sequence[float] = 0.0,
    seed: int = 0,
    worker: int = 0,
) -> np.ndarray:
    """Projective measurements along ``axis`` with independent readout flips.

    Returns a ``(shots, L)`` uint8 array; column 0 is ion 1 and a 1 means the
    +1 eigenvalue of sigma^axis. The generator is PCG64 seeded from
    ``SeedSequence([seed, worker])``, so records are bit-exact for a fixed
    seed and worker.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    check_normalized(state, 1e-10)
    L = site_count(state)
    axis = Axis.parse(axis)
    psi = state if axis is Axis.Z else global_rotation(state, axis, Axis.Z)
    probs = np.abs(psi) ** 2
    probs /= probs.sum()
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, worker)))
    outcomes = rng.choice(probs.size, size=shots, p=probs)
    bits = ((outcomes[:, None] >> np.arange(L)) & 1).astype(np.uint8)
    p_ion = BitFlipModel(p if np.ndim(p) == 0 else tuple(p)).per_ion(L)
    if np.any(p_ion > 0):
        bits ^= (rng.random((shots, L)) < p_ion).astype(np.uint8)
    return bits


def shot_walls(bits: np.ndarray) -> tuple[float, float]:
    """Mean number of unequal neighbour pairs per shot and its standard error."""
    bits = np.asarray(bits)
    per_shot = np.sum(bits[:, 1:] != bits[:, :-1], axis=1).astype(float)
    stderr = per_shot.std(ddof=1) / np.sqrt(per_shot.size) if per_shot.size > 1 else 0.0
    return float(per_shot.mean()), float(stderr)


def shot_correlator(bits: np.ndarray, i: int, j: int) -> tuple[float, float]:
    """Empirical <s_i s_j> (1-based sites) and its standard error."""
    bits = np.asarray(bits)
    s = 2.0 * bits.astype(float) - 1.0
    prod = s[:, i - 1] * s[:, j - 1]
    stderr = prod.std(ddof=1) / np.sqrt(prod.size) if prod.size > 1 else 0.0
    return float(prod.mean()), float(stderr)


def write_shots(path: str | Path, bits: np.ndarray) -> None:
    """One word of '0'/'1' per line, ion 1 leftmost."""
    bits = np.asarray(bits, dtype=np.uint8)
    lines = ["".join("1" if b else "0" for b in row) for row in bits]
    Path(path).write_text("\n".join(lines) + "\n")


def read_shots(path: str | Path) -> np.ndarray:
    rows = [line.strip() for line in Path(path).read_text().splitlines() if line.strip()]
    if not rows:
        return np.zeros((0, 0), dtype=np.uint8)
    width = len(rows[0])
    for n, row in enumerate(rows, 1):
        if len(row) != width or set(row) - {"0", "1"}:
            raise ValueError(f"{path}:{n}: malformed shot word {row!r}")
    return np.array([[c == "1" for c in row] for row in rows], dtype=np.uint8)
