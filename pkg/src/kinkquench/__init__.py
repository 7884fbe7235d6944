"""Quench dynamics and confinement in long-range transverse-field Ising chains."""

from .couplings import (
    KHZ,
    DriveParams,
    ModeSpectrum,
    fit_power_law,
    load_mode_file,
    ms_couplings,
    ms_couplings_two_axes,
    power_law_couplings,
    ring_couplings,
    ring_embedding,
)
from .errors import CapabilityError, ConfigError, EvolutionError, ResonanceError, TruncationError
from .evolution import Trajectory, dense_propagator, evolve
from .hamiltonian import (
    HamiltonianSpec,
    apply_hamiltonian,
    energy_expectation,
    exact_spectrum,
    exact_transition,
    low_spectrum,
    materialize_dense,
)
from .noise import BitFlipModel, degrade_correlator, estimate_flip_probability, sample_shots
from .observables import (
    connected_correlation,
    correlation_row,
    domain_wall_count,
    extract_gap,
    fit_sinusoid,
    magnetization,
    probe_sites,
    time_averaged_walls,
    wall_profile,
)
from .spin import Axis, apply_pauli, build_product_state, global_rotation
from .twokink import (
    band_spectrum,
    build_twokink_hamiltonian,
    confining_potential,
    gap_vs_size,
    twokink_ladder,
)

__version__ = "0.1.0"
