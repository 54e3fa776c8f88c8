//! Numerics for a two-parameter noncommutative deformation of quantum
//! mechanics on the plane, with an operator-valued correction to the
//! commutators: operator representation, uncertainty functionals, low
//! spectrum, modulation-space norms, and a minisuperspace wave equation.

pub mod algebra;
pub mod eigensolver;
pub mod error;
pub mod fft;
pub mod grid;
pub mod modspace;
pub mod operators;
pub mod states;
pub mod uncertainty;
pub mod wdw;

pub use algebra::{
    commutator_closure, derive_constants, forward_map, inverse_map, AlgebraParams, BaseSymbol,
    OperatorSymbol, Term,
};
pub use eigensolver::{
    coherent_state_probe, ground_state, hamiltonian, residual, spectrum_low, variational_probe,
    CoherentProbe, GroundStateResult, SolveOpts, VariationalReport,
};
pub use error::{NcError, Result};
pub use grid::GridSpec;
pub use modspace::{
    b_norm_sq, default_window, modulation_norm, norm_equivalence_report, sandwich_constants,
    stft, weight_checks, weight_eval, weighted_norm, AlphaNormRow, DecayRow,
    NormEquivalenceReport, StftGrid, Weight, WeightChecks, WeightKind, DEFAULT_WINDOW,
};
pub use operators::{
    assemble, commutator_apply, dispersion, expectation, hermiticity_defect, realness_defect,
    reconstruct_hw, verify_algebra, AlgebraReport, OperatorHandle, PairResidual,
    ReconstructionReport,
};
pub use states::{
    dilate, fourier, gaussian, inverse_fourier, random_smooth_state, read_state, translate,
    write_state, GaussianSpec, Wave1d, WaveFunction,
};
pub use uncertainty::{
    entropic_check, functional_f, gaussian_closed_forms, hpw_limit, minimal_length_probe,
    nullifying_translation, robertson, robertson_general, scale_infimum, scaling_demo,
    EntropicReport, GaussianForms, PairAlpha, ProbeRow, ScalingDemo, UncertaintyReport,
    ENTROPIC_BOUND,
};
pub use wdw::{
    assemble_separated, envelope_exponent, find_minimum, potential_eval, solve_verified,
    solve_zero_energy, tail_mass, OdeSolution, PotentialKind, PotentialSpec,
};
