//! Shared fixtures for the pipeline benchmarks.

use std::f64::consts::TAU;

use ionpair::{IonSpecies, TrapConfig};

pub const OMEGA_AX: f64 = TAU * 0.2e6;
pub const OMEGA_RAD: f64 = TAU * 3.5e6;

/// The two-magnesium-ion trap used throughout the benchmarks.
pub fn mg25_trap(n_ions: usize) -> TrapConfig {
    let species = IonSpecies::from_atomic_mass(25.0, 1).unwrap();
    TrapConfig::new(species, n_ions, OMEGA_RAD, OMEGA_AX).unwrap()
}
