"""Pseudospectral laboratory for the 2D cubic Schrodinger flow and its
frequency-truncated finite-dimensional approximations."""

from .grid import (
    AliasingError,
    ConvergenceError,
    DiagnosticSeries,
    Field,
    GeometryError,
    GridMismatchError,
    GridSpec,
    NyquistError,
    constant_field,
    energy,
    indicator_box,
    indicator_strip,
    inner_product,
    l2_norm,
    lebesgue_norm,
    pure_mode,
    radial_bump,
    random_band_limited,
    random_field,
    smooth_step,
    sobolev_seminorm,
    symplectic_form,
    to_physical,
    to_spectral,
)
from .multipliers import (
    SymbolSpec,
    apply_multiplier,
    band,
    bump,
    graded,
    graded_eval,
    graded_symbol,
    hamiltonian_truncated,
    kernel_tail_mass,
    kernel_torus,
    lipschitz_defect,
    lowpass,
    phi_eval,
)
from .dynamics import (
    EquationSpec,
    IntegratorSpec,
    Trajectory,
    conserved_report,
    default_dt,
    equation_hamiltonian,
    evolve,
    linear_propagate,
    nonlinear_rhs,
    step,
    strichartz_norms,
)
from .symmetries import (
    SymParams,
    apply_propagated_symmetry,
    apply_propagated_symmetry_inverse,
    apply_spacetime_symmetry,
    apply_symmetry,
    apply_symmetry_inverse,
    decoupling_l2,
    mass_decoupling_defect,
    orthogonality_gap,
)
from .transfer import (
    CutoffFamily,
    CutoffParams,
    QuietInterval,
    boundary_mass,
    build_cutoffs,
    find_quiet_interval,
    mass_outside,
    one_tile_indicator,
    pull_back,
    push_forward,
)
from .probes import (
    OperatorProbe,
    commutator_norm,
    mismatch_norm,
    plane_torus_gap,
    power_iteration,
)
from .fieldio import read_field, write_field, save_trajectory, load_trajectory

__version__ = "0.1.0"
