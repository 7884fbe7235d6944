import numpy as np
import pytest

from kinkquench.couplings import power_law_couplings, ring_embedding
from kinkquench.errors import CapabilityError
from kinkquench.evolution import evolve
from kinkquench.hamiltonian import (
    HamiltonianSpec,
    apply_hamiltonian,
    energy_expectation,
    exact_spectrum,
    exact_transition,
    low_spectrum,
    materialize_dense,
    parity_operator,
    parity_sector,
)
from kinkquench.observables import magnetizations
from kinkquench.spin import build_product_state
from kinkquench.twokink import lowest_gap

import oracles

# dominant upward spectral line of <Z_6(t)> from the zero-wall state,
# L=11, alpha=1.1, B/J0=0.75; frozen from a Kronecker-product dense
# diagonalization (tests/oracles.py), independent of the package
ED_GAP_L11 = 8.405182050253519


def random_spec(L, seed):
    rng = np.random.default_rng(seed)
    return HamiltonianSpec(oracles.random_couplings(L, rng), float(rng.uniform(0.1, 2.0)))


def test_single_spin_field():
    spec = HamiltonianSpec(np.zeros((1, 1)), 1.0)
    up = build_product_state(1, "z", 1)
    assert np.allclose(apply_hamiltonian(spec, up), -up)
    assert np.allclose(materialize_dense(spec), np.diag([1.0, -1.0]))  # (down, up) ordering


def test_pure_ising_pair():
    spec = HamiltonianSpec(power_law_couplings(2, 1.0, 1.0), 0.0)
    assert np.allclose(np.linalg.eigvalsh(materialize_dense(spec)), [-1, -1, 1, 1])
    assert np.allclose(low_spectrum(spec, 2), [-1, -1])


def test_free_spins():
    spec = HamiltonianSpec(np.zeros((2, 2)), 1.0)
    assert np.allclose(low_spectrum(spec, 4), [-2, 0, 0, 2])


@pytest.mark.parametrize("L", [1, 2, 3, 5, 8])
def test_matrix_free_matches_dense_oracle(L):
    spec = random_spec(L, L)
    H = oracles.dense_hamiltonian(spec.J, spec.B)
    assert np.allclose(materialize_dense(spec), H, atol=1e-12)
    psi = oracles.random_state(L, np.random.default_rng(L + 100))
    assert np.max(np.abs(apply_hamiltonian(spec, psi) - H @ psi)) <= 1e-12


def test_dense_hermitian_traceless():
    H = materialize_dense(random_spec(6, 2))
    assert np.max(np.abs(H - H.conj().T)) < 1e-12
    assert abs(np.trace(H)) < 1e-10


def test_parity_blocks_assemble_full_matrix():
    spec = random_spec(5, 4)
    full = materialize_dense(spec)
    for parity in (1, -1):
        rows = parity_sector(5, parity)
        assert np.array_equal(materialize_dense(spec, parity), full[np.ix_(rows, rows)])


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_hamiltonian(random_spec(3, 0), np.ones(4, dtype=complex))


def test_dense_capability_limit():
    with pytest.raises(CapabilityError):
        materialize_dense(HamiltonianSpec(power_law_couplings(15, 1.0, 1.0), 1.0))


def test_negative_field_rejected():
    with pytest.raises(ValueError):
        HamiltonianSpec(power_law_couplings(3, 1.0, 1.0), -1.0)


def test_low_spectrum_argument_error():
    with pytest.raises(ValueError):
        low_spectrum(random_spec(2, 0), 5)


def test_low_spectrum_states_are_eigenvectors():
    spec = random_spec(6, 9)
    E, V = low_spectrum(spec, 3, return_states=True)
    for n in range(3):
        assert np.allclose(apply_hamiltonian(spec, V[:, n]), E[n] * V[:, n], atol=1e-10)
    assert np.allclose(E, np.linalg.eigvalsh(oracles.dense_hamiltonian(spec.J, spec.B))[:3])


def test_energy_expectation_examples():
    spec = random_spec(5, 3)
    E, V = low_spectrum(spec, 1, return_states=True)
    assert energy_expectation(spec, V[:, 0]) == pytest.approx(E[0], abs=1e-10)
    J = power_law_couplings(6, 1.0, 1.1)
    aligned = build_product_state(6, "x", -1)
    assert energy_expectation(HamiltonianSpec(J, 0.0), aligned) == pytest.approx(
        -np.sum(np.triu(J, 1)), abs=1e-12
    )
    up = build_product_state(6, "z", 1)
    assert energy_expectation(HamiltonianSpec(np.zeros((6, 6)), 0.7), up) == pytest.approx(-0.7 * 6)


def test_hermiticity_random_pairs():
    spec = random_spec(6, 11)
    rng = np.random.default_rng(5)
    phi, psi = oracles.random_state(6, rng), oracles.random_state(6, rng)
    a = np.vdot(phi, apply_hamiltonian(spec, psi))
    b = np.vdot(psi, apply_hamiltonian(spec, phi))
    assert abs(a - np.conj(b)) < 1e-10


@pytest.mark.parametrize("L", [2, 4, 6])
def test_parity_commutes(L):
    H = materialize_dense(random_spec(L, L))
    P = np.diag(parity_operator(L))
    assert np.linalg.norm(H @ P - P @ H) < 1e-10
    Pz = oracles.pauli_string(L, [(i, "z") for i in range(1, L + 1)])
    assert np.allclose(np.diag(Pz), parity_operator(L) * (-1) ** L)


@pytest.mark.parametrize(
    "axis,sign,flips", [("x", -1, ()), ("x", 1, (3,)), ("z", 1, ()), ("z", -1, (2, 5))]
)
def test_sign_flipped_hamiltonian_gives_same_observables(axis, sign, flips):
    L = 6
    spec = HamiltonianSpec(power_law_couplings(L, 1.0, 1.1), 0.75)
    psi0 = build_product_state(L, axis, sign, flips)
    times = np.linspace(0, 2.0, 21)
    obs = {a: (lambda s, a=a: magnetizations(s, a)) for a in "xyz"}
    fwd = evolve(spec, psi0, times, tol=1e-11, observers=obs, store_states=False)
    neg = evolve(spec.negated(), psi0, times, tol=1e-11, observers=obs, store_states=False)
    for a in "xz":
        assert np.max(np.abs(fwd.records[a] - neg.records[a])) <= 1e-8
    # sigma^y is odd under complex conjugation, so it flips sign instead
    assert np.max(np.abs(fwd.records["y"] + neg.records["y"])) <= 1e-8


def test_exact_transition_l11():
    spec = HamiltonianSpec(power_law_couplings(11, 1.0, 1.1), 0.75)
    tr = exact_transition(exact_spectrum(spec), build_product_state(11, "x", -1), 6)
    assert tr.gap == pytest.approx(ED_GAP_L11, rel=1e-9)
    assert tr.weight > 0.01


def test_exact_gap_close_to_twokink():
    J = power_law_couplings(11, 1.0, 1.1)
    tk = lowest_gap(ring_embedding(J), 0.75, 11)
    assert abs(tk - ED_GAP_L11) / ED_GAP_L11 <= 0.05


def test_spec_is_immutable():
    spec = random_spec(3, 0)
    with pytest.raises(ValueError):
        spec.J[0, 1] = 5.0
