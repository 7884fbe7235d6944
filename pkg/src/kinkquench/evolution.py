"""Real-time propagation |psi(t)> = exp(-iHt)|psi(0)>.

The stepper is a short-iterate Lanczos scheme: build a Krylov basis at the
current state, then take the largest substep whose a-posteriori error
estimate fits the budget. The budget is ``tol`` per unit of total evolution
time, so accumulated error at every grid point stays below ``tol``.
Grid points that fall inside an accepted substep are read off the same
Krylov basis.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .errors import CapabilityError, EvolutionError
from .hamiltonian import HamiltonianSpec, apply_hamiltonian, materialize_dense

DEFAULT_TOL = 1e-8
TOL_FLOOR = 1e-13
PROPAGATOR_MAX_L = 10


@dataclass
class Trajectory:
    """States and/or observable records on a time grid.

    ``states`` is ``None`` when the run streamed observables only.
    ``records[name][k]`` is the observer output at ``times[k]``.
    """

    times: np.ndarray
    states: np.ndarray | None
    records: dict[str, np.ndarray] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def series(self, name: str) -> np.ndarray:
        try:
            return self.records[name]
        except KeyError:
            raise KeyError(f"trajectory has no record {name!r}; recorded: {sorted(self.records)}") from None


def check_time_grid(times) -> np.ndarray:
    t = np.asarray(times, dtype=float).reshape(-1)
    if t.size == 0:
        raise ValueError("time grid is empty")
    if t[0] < 0:
        raise ValueError("time grid must start at t >= 0")
    if np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return t


class _Krylov:
    """Lanczos basis and tridiagonal projection for one starting vector."""

    def __init__(self, matvec, v: np.ndarray, m_max: int):
        n = v.size
        beta0 = np.linalg.norm(v)
        basis = np.empty((min(m_max, n) + 1, n), dtype=complex)
        basis[0] = v / beta0
        alphas, betas = [], []
        self.matvecs = 0
        self.next_beta = 0.0
        m = min(m_max, n)
        for j in range(m):
            w = matvec(basis[j])
            self.matvecs += 1
            a = np.vdot(basis[j], w).real
            alphas.append(a)
            w = w - a * basis[j]
            if j > 0:
                w -= betas[-1] * basis[j - 1]
            # full reorthogonalization keeps the basis unitary to round-off
            w -= basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
            b = np.linalg.norm(w)
            if b <= 1e-13 * max(1.0, abs(a)) or j == m - 1:
                self.next_beta = 0.0 if b <= 1e-13 * max(1.0, abs(a)) else b
                break
            betas.append(b)
            basis[j + 1] = w / b
        k = len(alphas)
        self.basis = basis[:k]
        self.norm = beta0
        T = np.diag(alphas) + np.diag(betas[: k - 1], 1) + np.diag(betas[: k - 1], -1)
        self.theta, self.Q = np.linalg.eigh(T)
        self.first_row = self.Q[0].copy()

    def coefficients(self, tau: float) -> np.ndarray:
        return self.Q @ (np.exp(-1j * tau * self.theta) * self.first_row)

    def error(self, tau: float) -> float:
        if self.next_beta == 0.0:
            return 0.0
        return self.norm * self.next_beta * abs(self.coefficients(tau)[-1])

    def propagate(self, tau: float) -> np.ndarray:
        return self.norm * (self.coefficients(tau) @ self.basis)


def _largest_step(kry: _Krylov, span: float, rate: float) -> float:
    """Largest tau <= span with error(tau) <= rate * tau."""
    if kry.error(span) <= rate * span:
        return span
    hi = span
    lo = span / 2
    while kry.error(lo) > rate * lo:
        hi = lo
        lo /= 2
        if lo < 1e-300:
            raise EvolutionError("Krylov substep underflow; tolerance unreachable")
    for _ in range(30):
        mid = np.sqrt(lo * hi)
        if kry.error(mid) <= rate * mid:
            lo = mid
        else:
            hi = mid
    return lo


def evolve(
    spec: HamiltonianSpec,
    psi0: np.ndarray,
    times,
    tol: float = DEFAULT_TOL,
    observers: Mapping[str, Callable[[np.ndarray], Any]] | None = None,
    store_states: bool = True,
    krylov_dim: int = 30,
) -> Trajectory:
    """Propagate ``psi0`` under ``spec`` and sample it at ``times``.

    Each sampled state is within ``tol`` (Euclidean norm) of the exact
    exp(-iHt)|psi0>, as judged by the Lanczos error estimate. Observers
    are evaluated on each sampled state; their outputs become records.
    """
    t_grid = check_time_grid(times)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (1 << spec.L,):
        raise ValueError(f"psi0 has shape {psi0.shape}, expected ({1 << spec.L},)")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ValueError("psi0 must be normalized")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if tol < TOL_FLOOR:
        raise EvolutionError(f"tol={tol:g} is below the double-precision floor {TOL_FLOOR:g}")
    if krylov_dim < 2:
        raise ValueError("krylov_dim must be >= 2")

    observers = dict(observers or {})
    collected: dict[str, list] = {name: [] for name in observers}
    states = [] if store_states else None
    matvec = lambda v: apply_hamiltonian(spec, v)  # noqa: E731
    rate = tol / max(t_grid[-1], np.finfo(float).tiny)

    def emit(psi):
        if states is not None:
            states.append(psi)
        for name, fn in observers.items():
            collected[name].append(fn(psi))

    started = _time.perf_counter()
    psi, t_now = psi0.copy(), 0.0
    k, substeps, matvecs = 0, 0, 0
    while k < len(t_grid) and t_grid[k] <= t_now:
        emit(psi.copy())
        k += 1
    while k < len(t_grid):
        kry = _Krylov(matvec, psi, krylov_dim)
        matvecs += kry.matvecs
        tau = _largest_step(kry, t_grid[-1] - t_now, rate)
        if tau <= 1e-14 * max(1.0, t_grid[-1]):
            raise EvolutionError(
                f"substep {tau:.3e} collapsed at t={t_now:.6g}; increase krylov_dim or tol"
            )
        reach = t_now + tau
        while k < len(t_grid) and t_grid[k] <= reach * (1 + 1e-15):
            emit(kry.propagate(t_grid[k] - t_now))
            k += 1
        if k < len(t_grid):
            psi = kry.propagate(tau)
            t_now = reach
        substeps += 1

    records = {name: np.asarray(vals) for name, vals in collected.items()}
    meta = {
        "spec_digest": spec.digest,
        "L": spec.L,
        "B": spec.B,
        "J0": spec.J0,
        "tol": tol,
        "krylov_dim": krylov_dim,
        "substeps": substeps,
        "matvecs": matvecs,
        "wall_seconds": _time.perf_counter() - started,
    }
    return Trajectory(
        times=t_grid,
        states=None if states is None else np.asarray(states),
        records=records,
        metadata=meta,
    )


def dense_propagator(spec: HamiltonianSpec, t: float) -> np.ndarray:
    """exp(-iHt) by spectral decomposition of the dense matrix (L <= 10)."""
    if spec.L > PROPAGATOR_MAX_L:
        raise CapabilityError(f"dense propagator limited to L <= {PROPAGATOR_MAX_L} (got {spec.L})")
    E, V = np.linalg.eigh(materialize_dense(spec))
    return (V * np.exp(-1j * E * t)) @ V.T
