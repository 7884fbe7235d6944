"""Computational basis conventions and single-spin operations.

States are complex numpy arrays of length ``2**L`` in the sigma^z eigenbasis.
Basis index ``s`` encodes site ``i`` (1-based) in bit ``i - 1``: site 1 is the
least significant bit, and a set bit means spin up along z. Every function
here returns a fresh array and never mutates its input.
"""

from __future__ import annotations

from enum import Enum
from typing import Iterable

import numpy as np

MAX_SITES = 24
NORM_TOL = 1e-12

_SQRT_HALF = 1.0 / np.sqrt(2.0)


class Axis(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"

    @classmethod
    def parse(cls, value: "Axis | str") -> "Axis":
        if isinstance(value, Axis):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"axis must be one of x, y, z (got {value!r})") from None


def site_count(state: np.ndarray) -> int:
    """Number of spins encoded by a state vector."""
    n = int(np.shape(state)[0])
    L = n.bit_length() - 1
    if n < 2 or (1 << L) != n:
        raise ValueError(f"state length {n} is not a power of two >= 2")
    return L


def _check_site(site: int, L: int) -> None:
    if not 1 <= site <= L:
        raise IndexError(f"site {site} outside 1..{L}")


def basis_bits(L: int) -> np.ndarray:
    """``(2**L, L)`` array of bit values; column ``i - 1`` holds site ``i``."""
    idx = np.arange(1 << L)
    return ((idx[:, None] >> np.arange(L)) & 1).astype(np.int8)


def spin_eigenvector(axis: Axis | str, sign: int) -> np.ndarray:
    """Single-spin eigenstate of sigma^axis, ordered as (down_z, up_z)."""
    axis = Axis.parse(axis)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if axis is Axis.Z:
        return np.array([0.0, 1.0], dtype=complex) if sign > 0 else np.array([1.0, 0.0], dtype=complex)
    if axis is Axis.X:
        return _SQRT_HALF * np.array([sign, 1.0], dtype=complex)
    return _SQRT_HALF * np.array([sign * 1j, 1.0], dtype=complex)


def build_product_state(
    L: int, axis: Axis | str = Axis.X, sign: int = -1, flips: Iterable[int] = ()
) -> np.ndarray:
    """Product of sigma^axis eigenstates with eigenvalue ``sign``.

    Sites listed in ``flips`` (1-based) carry eigenvalue ``-sign`` instead,
    which is how domain walls are seeded into an otherwise aligned chain.
    """
    if L < 1 or L > MAX_SITES:
        raise ValueError(f"L must be in 1..{MAX_SITES}")
    flips = set(int(f) for f in flips)
    for f in flips:
        _check_site(f, L)
    up = spin_eigenvector(axis, sign)
    down = spin_eigenvector(axis, -sign)
    state = np.ones(1, dtype=complex)
    # kron puts the newest factor in the most significant position
    for site in range(1, L + 1):
        state = np.kron(down if site in flips else up, state)
    return state


def apply_pauli(state: np.ndarray, site: int, axis: Axis | str) -> np.ndarray:
    """Return sigma_site^axis |state>."""
    L = site_count(state)
    _check_site(site, L)
    axis = Axis.parse(axis)
    idx = np.arange(state.shape[0])
    mask = 1 << (site - 1)
    z = 1 - 2 * ((idx & mask) == 0)  # +1 where the bit is up
    if axis is Axis.Z:
        return z * state
    flipped = state[idx ^ mask]
    if axis is Axis.X:
        return flipped
    return -1j * z * flipped


def _rotation_matrix(from_axis: Axis, to_axis: Axis) -> np.ndarray:
    u = np.zeros((2, 2), dtype=complex)
    for sign in (1, -1):
        u += np.outer(spin_eigenvector(to_axis, sign), spin_eigenvector(from_axis, sign).conj())
    return u


def apply_single_site(state: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Apply the same 2x2 unitary to every site."""
    L = site_count(state)
    psi = np.asarray(state, dtype=complex).reshape((2,) * L)
    for axis in range(L):
        psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [axis])), 0, axis)
    return psi.reshape(-1)


def global_rotation(state: np.ndarray, from_axis: Axis | str, to_axis: Axis | str) -> np.ndarray:
    """Rotate every spin so sigma^from eigenstates become sigma^to eigenstates.

    Eigenvalues are preserved, so <sigma^from_i> before equals <sigma^to_i>
    after. Rotating back with the axes swapped is the exact inverse.
    """
    from_axis, to_axis = Axis.parse(from_axis), Axis.parse(to_axis)
    if from_axis is to_axis:
        raise ValueError("from_axis and to_axis must differ")
    return apply_single_site(state, _rotation_matrix(from_axis, to_axis))


def check_normalized(state: np.ndarray, tol: float = NORM_TOL) -> None:
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"state norm {norm!r} deviates from 1 by more than {tol}")
