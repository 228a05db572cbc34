"""Floquet engineering of molecular spin levels.

Numerical tools for a single electronic spin with zero-field splitting
driven by a time-periodic magnetic field: quasienergy spectra in the
extended Fourier space, static-field stability (clock-transition) analysis,
exact and high-frequency effective Hamiltonians, and the static-field
optimization problems built on them.

Units are ueV / mT / ns throughout.
"""

from .constants import HBAR, MU_B
from .drive import (
    DriveSpec,
    FourierField,
    POLARIZATION_NAMES,
    field_at,
    polarization_from_name,
    to_fourier,
)
from .floquet import (
    DegenerateLevelWarning,
    FloquetMatrix,
    FloquetSolution,
    LevelCurves,
    TrackingWarning,
    assemble_floquet,
    gradient_from_vector,
    gradients_for_tracked,
    match_to_previous,
    overlap,
    quasienergy_gradient,
    select_physical_replicas,
    solve_driven,
    solve_quasienergies,
    track_field_ramp,
    track_levels,
)
from .optimize import (
    SMFS_CUTOFFS,
    CancellationResult,
    DivergenceError,
    FieldSweep,
    SmfsResult,
    cancellation_solve,
    energy_sweep,
    smfs_search,
)
from .spin import (
    SpinOperators,
    StaticParams,
    solve_static,
    spin_operators,
    static_hamiltonian,
    zeeman_hamiltonian,
)
from .stroboscopic import (
    BranchAmbiguityError,
    EffectiveHamiltonian,
    decompose_spin1,
    effective_hamiltonian,
    effective_hamiltonian_exact,
    extract_cancellation_field,
    one_cycle_propagator,
    spin1_basis_matrices,
)
from .vanvleck import (
    EffectiveField,
    VanVleckCoefficients,
    VanVleckResult,
    effective_field,
    hamiltonian_harmonics,
    nonequilibrium_general,
    nonequilibrium_spin1,
    vanvleck_generic,
    vanvleck_spin,
)

__version__ = "0.1.0"
