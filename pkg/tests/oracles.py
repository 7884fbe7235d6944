"""Independent reference implementations used only by the tests.

Nothing here calls into kinkquench: operators are built from explicit
Kronecker products of 2x2 Pauli matrices, propagators from scipy's expm,
and classical energies from explicit spin configurations.
"""

import itertools

import numpy as np
from scipy.linalg import expm

# single-site matrices in the (down_z, up_z) ordering
I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SZ = np.array([[-1, 0], [0, 1]], dtype=complex)
PAULI = {"x": SX, "y": SY, "z": SZ}


def site_operator(L, site, op):
    """op on ``site`` (1-based); site 1 is the rightmost (least significant) factor."""
    out = np.ones((1, 1), dtype=complex)
    for s in range(L, 0, -1):
        out = np.kron(out, op if s == site else I2)
    return out


def pauli_string(L, factors):
    out = np.eye(1 << L, dtype=complex)
    for site, axis in factors:
        out = out @ site_operator(L, site, PAULI[axis])
    return out


def dense_hamiltonian(J, B, sign=1):
    J = np.asarray(J, dtype=float)
    L = J.shape[0]
    H = np.zeros((1 << L, 1 << L), dtype=complex)
    for i in range(L):
        for j in range(i + 1, L):
            if J[i, j] != 0:
                H -= J[i, j] * site_operator(L, i + 1, SX) @ site_operator(L, j + 1, SX)
        H -= B * site_operator(L, i + 1, SZ)
    return sign * H


def propagate(J, B, psi, t):
    return expm(-1j * t * dense_hamiltonian(J, B)) @ psi


def expectation(op, psi):
    return complex(np.vdot(psi, op @ psi))


def product_state(L, single_site_vectors):
    """Kronecker product with ``single_site_vectors[0]`` on site 1."""
    out = np.ones(1, dtype=complex)
    for v in single_site_vectors:
        out = np.kron(v, out)
    return out


def x_state(sign):
    return np.array([sign, 1.0], dtype=complex) / np.sqrt(2)


def random_state(L, rng):
    psi = rng.normal(size=1 << L) + 1j * rng.normal(size=1 << L)
    return psi / np.linalg.norm(psi)


def random_couplings(L, rng, scale=1.0):
    A = rng.uniform(0.1, 1.0, size=(L, L)) * scale
    J = np.triu(A, 1)
    return J + J.T


def classical_energy(J, spins):
    """-sum_{i<j} J_ij s_i s_j for an explicit +-1 configuration."""
    L = len(spins)
    return -sum(J[i, j] * spins[i] * spins[j] for i, j in itertools.combinations(range(L), 2))


def ring_matrix(L, J_of_d):
    """Periodic coupling matrix from a function of ring distance."""
    J = np.zeros((L, L))
    for i in range(L):
        for j in range(L):
            if i != j:
                d = min(abs(i - j), L - abs(i - j))
                J[i, j] = J_of_d(d)
    return J


def mode_sum_loop(b, nu, rabi, detuning, recoil):
    L = b.shape[0]
    J = np.zeros((L, L))
    for i in range(L):
        for j in range(L):
            if i == j:
                continue
            total = 0.0
            for m in range(len(nu)):
                total += b[i, m] * b[j, m] / (detuning**2 - nu[m] ** 2)
            J[i, j] = rabi**2 * recoil * total
    return J
