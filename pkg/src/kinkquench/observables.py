"""Measured quantities: magnetizations, connected correlations, domain walls, gap fits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares

from .evolution import Trajectory
from .spin import Axis, apply_pauli, site_count

IMAG_TOL = 1e-10


def pauli_string_expectation(state: np.ndarray, ops: Iterable[tuple[int, Axis | str]]) -> complex:
    """<psi| prod sigma |psi> for a list of (site, axis) factors, rightmost applied first."""
    phi = state
    for site, axis in reversed(list(ops)):
        phi = apply_pauli(phi, site, axis)
    return complex(np.vdot(state, phi))


def _real(value: complex) -> float:
    if abs(value.imag) > IMAG_TOL:
        raise ArithmeticError(f"expectation value has imaginary part {value.imag:.3e}")
    return float(value.real)


def magnetization(state: np.ndarray, site: int, axis: Axis | str) -> float:
    """<sigma_site^axis>."""
    return _real(pauli_string_expectation(state, [(site, axis)]))


def magnetizations(state: np.ndarray, axis: Axis | str) -> np.ndarray:
    L = site_count(state)
    return np.array([magnetization(state, i, axis) for i in range(1, L + 1)])


def connected_correlation(state: np.ndarray, i: int, j: int, axis: Axis | str = Axis.X) -> float:
    """<s_i s_j> - <s_i><s_j> along one axis."""
    both = _real(pauli_string_expectation(state, [(i, axis), (j, axis)]))
    return both - magnetization(state, i, axis) * magnetization(state, j, axis)


def correlation_row(state: np.ndarray, ref: int, axis: Axis | str = Axis.X) -> np.ndarray:
    """C_{i,ref} for every site i."""
    L = site_count(state)
    m = magnetizations(state, axis)
    ref_flipped = apply_pauli(state, ref, axis)
    out = np.empty(L)
    for i in range(1, L + 1):
        both = _real(complex(np.vdot(state, apply_pauli(ref_flipped, i, axis))))
        out[i - 1] = both - m[i - 1] * m[ref - 1]
    return out


def wall_profile(state: np.ndarray) -> np.ndarray:
    """Per-bond wall occupation N_j = (1 - <X_j X_{j+1}>)/2, j = 1..L-1."""
    L = site_count(state)
    if L < 2:
        raise ValueError("wall profile needs L >= 2")
    xx = np.array(
        [_real(pauli_string_expectation(state, [(j, "x"), (j + 1, "x")])) for j in range(1, L)]
    )
    return (1.0 - xx) / 2.0


def domain_wall_count(state: np.ndarray) -> float:
    return float(wall_profile(state).sum())


def _window_integral(t: np.ndarray, y: np.ndarray, t1: float, t2: float) -> float:
    if t1 < t[0] - 1e-12 or t2 > t[-1] + 1e-12:
        raise IndexError(f"window [{t1}, {t2}] outside grid [{t[0]}, {t[-1]}]")
    if not t2 > t1:
        raise ValueError("window must have t2 > t1")
    inside = (t > t1) & (t < t2)
    tt = np.concatenate([[t1], t[inside], [t2]])
    yy = np.concatenate([[np.interp(t1, t, y)], y[inside], [np.interp(t2, t, y)]])
    return float(np.trapezoid(yy, tt))


def _wall_series(trajectory: Trajectory) -> np.ndarray:
    if "walls" in trajectory.records:
        return np.asarray(trajectory.records["walls"], dtype=float)
    if trajectory.states is None:
        raise KeyError("trajectory stores neither states nor a 'walls' record")
    return np.array([domain_wall_count(s) for s in trajectory.states])


def time_averaged_walls(trajectory: Trajectory, t1: float, t2: float) -> float:
    """Cumulative time average of the total wall number over [t1, t2].

    Trapezoidal rule on the stored grid; window edges that fall between
    grid points are linearly interpolated.
    """
    return _window_integral(trajectory.times, _wall_series(trajectory), t1, t2) / (t2 - t1)


def quadrature_check(trajectory: Trajectory, t1: float, t2: float) -> float:
    """Relative change of the window average when every other grid point is dropped.

    The stored grid is the 2x refinement of the thinned one; a value below
    0.01 certifies the average to the 1% level.
    """
    t = trajectory.times
    y = _wall_series(trajectory)
    keep = np.union1d(np.arange(0, t.size, 2), [t.size - 1])
    fine = _window_integral(t, y, t1, t2)
    coarse = _window_integral(t[keep], y[keep], t1, t2)
    return abs(fine - coarse) / max(abs(fine), 1e-12)


@dataclass
class SinusoidFit:
    """A cos(omega t + phase) + offset fitted to a series."""

    amplitude: float
    omega: float
    phase: float
    offset: float
    residual: float
    omega_init: float
    converged: bool = True
    degenerate: bool = False
    window: tuple[float, float] = (0.0, 0.0)
    message: str = ""

    def __call__(self, t):
        return self.amplitude * np.cos(self.omega * np.asarray(t) + self.phase) + self.offset


def spectral_peak(times: np.ndarray, values: np.ndarray, pad: int = 16) -> float:
    """Angular frequency of the largest non-DC peak of the linearly detrended series.

    Ties go to the lowest frequency.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    dt = np.diff(t)
    if np.max(np.abs(dt - dt.mean())) > 1e-6 * dt.mean():
        # resample non-uniform grids before the FFT
        grid = np.linspace(t[0], t[-1], t.size)
        y = np.interp(grid, t, y)
        t = grid
    step = t[1] - t[0]
    y = y - np.polyval(np.polyfit(t, y, 1), t)
    nfft = max(pad * t.size, 4096)
    power = np.abs(np.fft.rfft(y, nfft))
    freqs = 2.0 * np.pi * np.fft.rfftfreq(nfft, step)
    power[0] = 0.0
    return float(freqs[int(np.argmax(power))])


def fit_sinusoid(times, values, omega_init: float | None = None) -> SinusoidFit:
    """Single-frequency least-squares fit of A cos(wt + phi) + C.

    The frequency starts at the spectral peak (or ``omega_init``), amplitude
    and phase from a linear solve at that frequency, and everything is then
    refined by nonlinear least squares with omega kept within a factor two
    of its start. A fit that ends on that bound, or fails, comes back with
    ``converged=False`` and ``omega = omega_init``.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("times and values must be 1-D arrays of equal length")
    if t.size < 8:
        raise ValueError("fit_sinusoid needs at least 8 samples")
    window = (float(t[0]), float(t[-1]))
    if np.ptp(y) <= 1e-12 * max(1.0, abs(y.mean())):
        return SinusoidFit(0.0, 0.0, 0.0, float(y.mean()), 0.0, 0.0, True, True, window,
                           "constant series")
    w0 = spectral_peak(t, y) if omega_init is None else float(omega_init)
    span = t[-1] - t[0]
    if w0 * span < 2.0 * np.pi * (1 - 1e-9):
        return SinusoidFit(0.0, w0, 0.0, float(y.mean()), float(np.std(y) * np.sqrt(y.size)), w0,
                           False, False, window, "series spans less than one period")
    X = np.column_stack([np.cos(w0 * t), np.sin(w0 * t), np.ones_like(t)])
    a, b, c = np.linalg.lstsq(X, y, rcond=None)[0]
    p0 = [np.hypot(a, b), w0, np.arctan2(-b, a), c]
    lo, hi = 0.5 * w0, 2.0 * w0

    def resid(p):
        return p[0] * np.cos(p[1] * t + p[2]) + p[3] - y

    try:
        sol = least_squares(resid, p0, bounds=([0.0, lo, -np.inf, -np.inf], [np.inf, hi, np.inf, np.inf]),
                            x_scale="jac", xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=2000)
    except (ValueError, np.linalg.LinAlgError) as exc:
        return SinusoidFit(p0[0], w0, p0[2], c, float("nan"), w0, False, False, window, str(exc))
    A, w, phi, C = sol.x
    residual = float(np.linalg.norm(sol.fun))
    at_bound = min(w - lo, hi - w) <= 1e-6 * w0
    if not sol.success or at_bound:
        return SinusoidFit(A, w0, phi, C, residual, w0, False, False, window,
                           "frequency hit the search bound" if at_bound else sol.message)
    if A <= 1e-12 * max(1.0, abs(C)):
        return SinusoidFit(0.0, 0.0, 0.0, C, residual, w0, True, True, window, "zero amplitude")
    phi = float(np.angle(np.exp(1j * phi)))
    return SinusoidFit(float(A), float(w), phi, float(C), residual, w0, True, False, window)


@dataclass
class GapEstimate:
    gap: float  # omega / J0
    site: int
    fit: SinusoidFit
    window: tuple[float, float] = field(default=(0.0, 0.0))


def extract_gap(
    trajectory: Trajectory,
    site: int,
    J0: float | None = None,
    periods: float = 2.0,
    window: tuple[float, float] | None = None,
) -> GapEstimate:
    """Energy gap (units of J0) from the oscillation of <Z_site(t)>.

    By default the fit runs over [t0, t0 + periods * 2pi/omega0], where
    omega0 is the spectral peak of the whole recorded series, i.e. about
    two oscillations before the signal thermalizes. The record ``"mz"``
    (per-time array over sites) is used if present, otherwise states.
    """
    if J0 is None:
        J0 = float(trajectory.metadata.get("J0", 1.0))
    t = trajectory.times
    if "mz" in trajectory.records:
        y = np.asarray(trajectory.records["mz"])[:, site - 1]
    elif trajectory.states is not None:
        y = np.array([magnetization(s, site, "z") for s in trajectory.states])
    else:
        raise KeyError("trajectory has neither an 'mz' record nor states")
    w0 = spectral_peak(t, y)
    if window is None:
        window = (float(t[0]), float(min(t[-1], t[0] + periods * 2 * np.pi / w0)))
    sel = (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12)
    fit = fit_sinusoid(t[sel], y[sel], omega_init=w0)
    fit.window = window
    return GapEstimate(fit.omega / J0, site, fit, window)


def probe_sites(L: int, domain_size: int) -> tuple[list[int], list[int]]:
    """Initial flipped sites and probe sites for a centred domain.

    Size 0 probes the centre; larger domains are probed on the two sites
    just outside the domain. For odd L: size 1 flips the centre, size 2
    flips the centre and its left neighbour.
    """
    c = (L + 1) // 2
    if domain_size == 0:
        return [], [c]
    start = c - (domain_size - 1) // 2 - (1 if domain_size % 2 == 0 else 0)
    flips = list(range(start, start + domain_size))
    if flips[0] < 2 or flips[-1] > L - 1:
        raise ValueError(f"domain of size {domain_size} does not fit inside L={L} with probes")
    return flips, [flips[0] - 1, flips[-1] + 1]


def cumulative_ladder(gaps: Sequence[float]) -> np.ndarray:
    """E_0 = 0, E_{n+1} = E_n + gap_n."""
    return np.concatenate([[0.0], np.cumsum(gaps)])
