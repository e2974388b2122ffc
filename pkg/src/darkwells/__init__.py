"""Two distant wells, one shared continuum: dark states and their dynamics."""

from .model import (
    DegenerateSystemError,
    DerivedParams,
    NoBoundStateError,
    ParallelWellPair,
    WellPair,
    derive,
    pair_from_mapping,
    pair_to_mapping,
    wide_band_self_energy,
)
from .rotation import (
    NullResultError,
    RotatedBasis,
    bright_state,
    check_constant_ratio,
    dark_state,
    dot_from_rotated,
    dot_to_rotated,
    null_measurement_project,
    read_coupling_table,
    rotate,
)
from .dynamics import (
    InfiniteDwellTimeError,
    SingleParticleState,
    Trajectory,
    amplitude_trajectory,
    analytic_sigma_symmetric,
    asymptotic_probs,
    asymptotic_sigma_left_start,
    dwell_time,
    effective_hamiltonian,
    evolve_amplitudes,
    evolve_master,
    fit_decay_rate,
    master_rhs,
    master_trajectory,
    slow_decay_rate,
)
from .oracle import (
    DiscretizedReservoir,
    FockSpace,
    OracleRun,
    ReducedQuantities,
    build_fock_hamiltonian,
    build_single_particle_hamiltonian,
    chebyshev_propagate,
    convergence_report,
    default_cutoff,
    evolve_exact,
    evolve_fock,
    fock_basis_state,
    reduced_quantities,
    reservoir_couplings,
    single_particle_trajectory,
    slater_dot_rdm,
    slater_reservoir_distribution,
)
from .fermions import (
    EffectiveSingleParticle,
    FermionAsymptoticState,
    branch_rdm,
    branches_to_json,
    creation_product,
    is_product_state,
    parallel_map,
    three_electron_asymptotic,
    two_electron_asymptotic,
    two_electron_parallel_asymptotic,
)
from .bosons import (
    BosonFockState,
    FockDistribution,
    SurdAmplitude,
    emission_distribution,
    equal_fill_even_distribution,
    flat_approximation,
    gaussian_approximation,
    one_well_distribution,
    retained_state_split,
    rotate_fock,
    state_overlap,
)

__version__ = "0.1.0"
