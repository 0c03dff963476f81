//! Simulation of phonon pair creation in the radial modes of trapped-ion
//! chains driven by a time-dependent axial confinement.
//!
//! The crate covers the full pipeline: equilibrium chain and radial mode
//! spectrum, the classical scale function b(t) for a given axial waveform,
//! numerical mode-function integration with Bogoliubov coefficient
//! extraction, the closed-form and WKB approximations for the collision and
//! expansion drives, and the Gaussian-state entanglement analysis of the
//! two-ion radial modes.

pub mod bogoliubov;
pub mod constants;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod ode;
pub mod scale;
pub mod trap;
pub mod wkb;

pub use bogoliubov::{
    analytic_collision_beta_sq, analytic_collision_log_beta_sq, analytic_expansion_beta_sq,
    analytic_expansion_log_beta_sq, extract_bogoliubov, higher_mode_exponent, higher_mode_ranking,
    integrate_mode, mean_phonons, p1p2_beta_sq, squeezed_state_amplitudes,
    squeezing_from_bogoliubov, stationary_window, sudden_quench_beta_sq, BogoliubovCoefficients,
    FrequencyProfile, ModeOptions, ModeProfile, ModeSolution, PairParameterEstimate,
    SqueezedStateAmplitudes, SqueezingParameter,
};
pub use entanglement::{
    basis_change, bose_occupation, entanglement_of_formation, evolve_covariance, is_entangled,
    perturbative_state, pt_symplectic_eigenvalues, squeeze_transform, symmetric_squeezing,
    symplectic_eigenvalues, thermal_covariance, Basis, CovarianceMatrix, EntanglementVerdict,
    PerturbativeState, PtSymplecticEigenvalues, SymplecticTransform, ThermalOccupation,
};
pub use error::{Error, Result};
pub use scale::{
    axial_frequency_from_scale, ion_separation, mode_frequency_sq, solve_scale_ode, AxialWaveform,
    CollisionModel, ExpansionModel, ScaleFunction, ScaleOdeOptions, ScalePoint, ScaleTrajectory,
};
pub use trap::{
    coulomb_constant, coupling_matrix, critical_scale, mode_spectrum, solve_equilibrium,
    EquilibriumChain, IonSpecies, ModeSpectrum, TrapConfig,
};
pub use wkb::{
    taylor_wkb_exponent, wkb_beta_exponent, CollisionFrequencyProfile, ComplexFrequencyProfile,
    QuadraticFrequencyProfile, WkbEstimate,
};
