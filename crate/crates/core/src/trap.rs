//! Trap configuration, equilibrium ion chain, radial coupling matrix and
//! normal-mode spectrum.

use crate::constants::{ATOMIC_MASS, ELEMENTARY_CHARGE, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, solve_linear, Matrix};

/// One ion species: mass and charge state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonSpecies {
    mass: f64,
    charge_multiple: u32,
}

impl IonSpecies {
    /// Mass in kilograms, charge in units of the elementary charge.
    pub fn new(mass: f64, charge_multiple: u32) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::InvalidInput {
                what: "ion species",
                why: format!("mass must be positive, got {mass}"),
            });
        }
        if charge_multiple < 1 {
            return Err(Error::InvalidInput {
                what: "ion species",
                why: "charge multiple must be at least 1".into(),
            });
        }
        Ok(IonSpecies { mass, charge_multiple })
    }

    /// Mass given in unified atomic mass units.
    pub fn from_atomic_mass(mass_u: f64, charge_multiple: u32) -> Result<Self> {
        IonSpecies::new(mass_u * ATOMIC_MASS, charge_multiple)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn charge_multiple(&self) -> u32 {
        self.charge_multiple
    }

    pub fn charge(&self) -> f64 {
        self.charge_multiple as f64 * ELEMENTARY_CHARGE
    }
}

/// Trap parameters: ion species and count, radial secular frequency,
/// initial axial frequency. All frequencies are angular (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    pub species: IonSpecies,
    pub n_ions: usize,
    pub omega_rad: f64,
    pub omega_ax_in: f64,
}

impl TrapConfig {
    pub fn new(species: IonSpecies, n_ions: usize, omega_rad: f64, omega_ax_in: f64) -> Result<Self> {
        if n_ions == 0 {
            return Err(Error::InvalidInput {
                what: "trap configuration",
                why: "need at least one ion".into(),
            });
        }
        if !(omega_ax_in > 0.0) || !(omega_rad > omega_ax_in) {
            // The radial confinement must dominate the axial one for a stable
            // linear chain with well-defined radial modes.
            return Err(Error::InvalidInput {
                what: "trap configuration",
                why: format!(
                    "frequencies must satisfy omega_rad > omega_ax_in > 0, got {omega_rad} and {omega_ax_in}"
                ),
            });
        }
        Ok(TrapConfig { species, n_ions, omega_rad, omega_ax_in })
    }
}

/// Coulomb coupling strength: gamma = q^2 / (4 pi eps0 m), units m^3/s^2.
/// This makes the pair force gamma / r^2 an acceleration.
pub fn coulomb_constant(species: &IonSpecies) -> f64 {
    let q = species.charge();
    q * q / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY * species.mass())
}

/// Static equilibrium of the linear chain: sorted axial positions (m) with
/// the Coulomb constant they were solved for.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumChain {
    positions: Vec<f64>,
    gamma: f64,
    omega_ax_in: f64,
}

impl EquilibriumChain {
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn n_ions(&self) -> usize {
        self.positions.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega_ax_in(&self) -> f64 {
        self.omega_ax_in
    }

    /// Equilibrium separation for the two-ion chain.
    pub fn separation(&self) -> Result<f64> {
        if self.positions.len() != 2 {
            return Err(Error::InvalidInput {
                what: "equilibrium chain",
                why: format!("separation is defined for 2 ions, chain has {}", self.positions.len()),
            });
        }
        Ok(self.positions[1] - self.positions[0])
    }

    /// Largest force-balance residual relative to the trap force scale.
    pub fn max_force_residual(&self) -> f64 {
        let scale = (self.gamma / self.omega_ax_in.powi(2)).cbrt();
        let u: Vec<f64> = self.positions.iter().map(|x| x / scale).collect();
        dimensionless_force(&u)
            .iter()
            .fold(0.0_f64, |m, f| m.max(f.abs()))
            / u.iter().fold(1e-300_f64, |m, x| m.max(x.abs())).max(1.0)
    }
}

/// Dimensionless force balance: F_k = u_k - sum_{l != k} sign(u_k - u_l) / (u_k - u_l)^2.
fn dimensionless_force(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut f = vec![0.0; n];
    for k in 0..n {
        let mut coulomb = 0.0;
        for l in 0..n {
            if l == k {
                continue;
            }
            let d = u[k] - u[l];
            coulomb += d / (d.abs().powi(3));
        }
        f[k] = u[k] - coulomb;
    }
    f
}

fn force_jacobian(u: &[f64]) -> Matrix {
    let n = u.len();
    Matrix::from_fn(n, |k, l| {
        if k == l {
            let mut sum = 1.0;
            for j in 0..n {
                if j != k {
                    sum += 2.0 / (u[k] - u[j]).abs().powi(3);
                }
            }
            sum
        } else {
            -2.0 / (u[k] - u[l]).abs().powi(3)
        }
    })
}

/// Solve the force-balance equations with damped Newton iteration seeded by a
/// uniformly spaced chain. Relative residual tolerance 1e-12.
pub fn solve_equilibrium(config: &TrapConfig) -> Result<EquilibriumChain> {
    let gamma = coulomb_constant(&config.species);
    let scale = (gamma / config.omega_ax_in.powi(2)).cbrt();
    let n = config.n_ions;

    if n == 1 {
        return Ok(EquilibriumChain { positions: vec![0.0], gamma, omega_ax_in: config.omega_ax_in });
    }

    // uniform-spacing seed; the spacing constant only needs to be in the basin
    let mut u: Vec<f64> = (0..n).map(|k| (k as f64 - (n as f64 - 1.0) / 2.0) * 1.4).collect();

    const TOL: f64 = 1e-12;
    const MAX_ITER: usize = 200;
    let mut residual = f64::INFINITY;

    for _ in 0..MAX_ITER {
        let f = dimensionless_force(&u);
        let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u_scale = u.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        residual = f.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / u_scale;
        if residual < TOL {
            break;
        }

        let jac = force_jacobian(&u);
        let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = solve_linear(&jac, &neg_f).ok_or(Error::EquilibriumNotConverged {
            iterations: MAX_ITER,
            residual,
        })?;

        // backtracking line search; reject steps that reorder the chain
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(x, d)| x + lambda * d).collect();
            let ordered = trial.windows(2).all(|w| w[1] > w[0]);
            if ordered {
                let ft = dimensionless_force(&trial);
                let nt = ft.iter().map(|v| v * v).sum::<f64>().sqrt();
                if nt < norm {
                    u = trial;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::EquilibriumNotConverged { iterations: MAX_ITER, residual });
        }
    }

    if residual >= TOL {
        return Err(Error::EquilibriumNotConverged { iterations: MAX_ITER, residual });
    }

    // center of charge exactly at the trap center
    let mean = u.iter().sum::<f64>() / n as f64;
    let positions: Vec<f64> = u.iter().map(|x| (x - mean) * scale).collect();

    Ok(EquilibriumChain { positions, gamma, omega_ax_in: config.omega_ax_in })
}

/// Radial coupling matrix: diagonal holds the summed inverse-cube couplings,
/// off-diagonal the pair couplings with a minus sign. Row sums vanish.
pub fn coupling_matrix(chain: &EquilibriumChain) -> Result<Matrix> {
    let x = chain.positions();
    let n = x.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if x[i] == x[j] {
                return Err(Error::CoincidentIons { i, j });
            }
        }
    }
    let gamma = chain.gamma();
    Ok(Matrix::from_fn(n, |k, l| {
        if k == l {
            (0..n)
                .filter(|&j| j != k)
                .map(|j| gamma / (x[k] - x[j]).abs().powi(3))
                .sum()
        } else {
            -gamma / (x[k] - x[l]).abs().powi(3)
        }
    }))
}

/// Normal-mode eigenvalues (rad^2/s^2, ascending) and orthonormal mode shapes
/// (columns of `eigenvectors`).
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl ModeSpectrum {
    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Diagonalize the coupling matrix with cyclic Jacobi rotations.
pub fn mode_spectrum(m: &Matrix) -> Result<ModeSpectrum> {
    if !m.is_symmetric(1e-12) {
        return Err(Error::InvalidInput {
            what: "coupling matrix",
            why: "matrix must be symmetric".into(),
        });
    }
    let eig = jacobi_eigen(m);
    Ok(ModeSpectrum { eigenvalues: eig.values, eigenvectors: eig.vectors })
}

/// Scale factor at which the highest radial mode goes soft:
/// b_crit = (omega_ax_in^2 / omega_rad^2)^(1/3).
pub fn critical_scale(config: &TrapConfig) -> f64 {
    (config.omega_ax_in * config.omega_ax_in / (config.omega_rad * config.omega_rad)).cbrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn mg25() -> IonSpecies {
        IonSpecies::from_atomic_mass(25.0, 1).unwrap()
    }

    fn paper_config(n: usize) -> TrapConfig {
        TrapConfig::new(mg25(), n, TAU * 3.5e6, TAU * 0.2e6).unwrap()
    }

    #[test]
    fn coulomb_constant_mg25() {
        // q^2 / (4 pi eps0 m) from CODATA values
        let gamma = coulomb_constant(&mg25());
        assert_relative_eq!(gamma, 5.5574183076958059e-3, max_relative = 1e-12);
    }

    #[test]
    fn coulomb_constant_scalings() {
        let g1 = coulomb_constant(&mg25());
        let g_double_mass = coulomb_constant(&IonSpecies::from_atomic_mass(50.0, 1).unwrap());
        assert_relative_eq!(g_double_mass, g1 / 2.0, max_relative = 1e-14);
        let g_charge2 = coulomb_constant(&IonSpecies::from_atomic_mass(25.0, 2).unwrap());
        assert_relative_eq!(g_charge2, 4.0 * g1, max_relative = 1e-14);
    }

    #[test]
    fn species_validation() {
        assert!(IonSpecies::new(-1.0, 1).is_err());
        assert!(IonSpecies::new(1e-26, 0).is_err());
        assert!(TrapConfig::new(mg25(), 2, TAU * 0.1e6, TAU * 0.2e6).is_err());
        assert!(TrapConfig::new(mg25(), 0, TAU * 3.5e6, TAU * 0.2e6).is_err());
    }

    #[test]
    fn single_ion_sits_at_center() {
        let config = paper_config(1);
        let chain = solve_equilibrium(&config).unwrap();
        assert_eq!(chain.positions(), &[0.0]);
    }

    #[test]
    fn two_ion_separation_matches_closed_form() {
        let config = paper_config(2);
        let chain = solve_equilibrium(&config).unwrap();
        let d = chain.separation().unwrap();
        // d^3 = 2 gamma / omega^2
        let expected = (2.0 * chain.gamma() / config.omega_ax_in.powi(2)).cbrt();
        assert_relative_eq!(d, expected, max_relative = 1e-12);
        assert_relative_eq!(d, 19.1643657919e-6, max_relative = 1e-10);
        assert!(chain.max_force_residual() < 1e-10);
        // mirror symmetry
        assert_relative_eq!(chain.positions()[0], -chain.positions()[1], max_relative = 1e-12);
    }

    #[test]
    fn three_ion_spacing_matches_potential_minimum() {
        let config = paper_config(3);
        let chain = solve_equilibrium(&config).unwrap();
        let x = chain.positions();
        assert_relative_eq!(x[1], 0.0, epsilon = 1e-18);

        // Independent oracle: golden-section minimization of the potential
        // over the symmetric ansatz {-d, 0, d}.
        let gamma = chain.gamma();
        let w2 = config.omega_ax_in.powi(2);
        let energy = |d: f64| w2 * d * d + 2.5 * gamma / d;
        let (mut a, mut b) = (1e-6, 1e-4);
        let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - phi * (b - a);
            let d_ = a + phi * (b - a);
            if energy(c) < energy(d_) {
                b = d_;
            } else {
                a = c;
            }
        }
        let d_oracle = 0.5 * (a + b);
        let d_closed = (5.0 * gamma / (4.0 * w2)).cbrt();
        assert_relative_eq!(d_oracle, d_closed, max_relative = 1e-7);
        assert_relative_eq!(x[2], d_closed, max_relative = 1e-10);
        assert_relative_eq!(x[0], -d_closed, max_relative = 1e-10);
    }

    #[test]
    fn equilibrium_positions_scale_with_gamma_cbrt() {
        // rescaling gamma -> 8 gamma doubles all positions: use charge 2 and
        // mass/4 ... simpler: compare two configs with mass ratio 8.
        let c1 = paper_config(5);
        let heavy = IonSpecies::from_atomic_mass(200.0, 1).unwrap(); // gamma / 8
        let c2 = TrapConfig::new(heavy, 5, TAU * 3.5e6, TAU * 0.2e6).unwrap();
        let e1 = solve_equilibrium(&c1).unwrap();
        let e2 = solve_equilibrium(&c2).unwrap();
        for (a, b) in e1.positions().iter().zip(e2.positions()) {
            if *a == 0.0 {
                assert!(b.abs() < 1e-16);
            } else {
                assert_relative_eq!(*a, 2.0 * b, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn coupling_matrix_two_ions() {
        let config = paper_config(2);
        let chain = solve_equilibrium(&config).unwrap();
        let m = coupling_matrix(&chain).unwrap();
        let d = chain.separation().unwrap();
        assert_relative_eq!(m.get(0, 1), -chain.gamma() / d.powi(3), max_relative = 1e-12);
        let spec = mode_spectrum(&m).unwrap();
        // center-of-mass eigenvalue 0, rocking eigenvalue omega_ax_in^2
        assert!(spec.eigenvalues[0].abs() < 1e-10 * spec.eigenvalues[1]);
        assert_relative_eq!(spec.eigenvalues[1], config.omega_ax_in.powi(2), max_relative = 1e-10);
        // mode shapes (1,1)/sqrt(2) and (1,-1)/sqrt(2)
        let inv2 = 1.0 / 2.0_f64.sqrt();
        assert_relative_eq!(spec.eigenvectors.get(0, 0), inv2, max_relative = 1e-10);
        assert_relative_eq!(spec.eigenvectors.get(1, 0), inv2, max_relative = 1e-10);
        assert_relative_eq!(spec.eigenvectors.get(0, 1), inv2, max_relative = 1e-10);
        assert_relative_eq!(spec.eigenvectors.get(1, 1), -inv2, max_relative = 1e-10);
    }

    #[test]
    fn coupling_matrix_row_sums_vanish_up_to_n10() {
        for n in 2..=10 {
            let config = paper_config(n);
            let chain = solve_equilibrium(&config).unwrap();
            let m = coupling_matrix(&chain).unwrap();
            let scale = m.max_abs();
            for i in 0..n {
                let row: f64 = (0..n).map(|j| m.get(i, j)).sum();
                assert!(row.abs() < 1e-12 * scale, "row {i} sum {row} at n = {n}");
            }
            let spec = mode_spectrum(&m).unwrap();
            assert!(spec.eigenvalues[0].abs() < 1e-10 * spec.eigenvalues[n - 1]);
        }
    }

    #[test]
    fn three_ion_eigenvalues_nonnegative_and_sorted() {
        let config = paper_config(3);
        let chain = solve_equilibrium(&config).unwrap();
        let spec = mode_spectrum(&coupling_matrix(&chain).unwrap()).unwrap();
        assert_eq!(spec.n_modes(), 3);
        let top = spec.eigenvalues[2];
        assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(spec.eigenvalues.iter().all(|&l| l > -1e-10 * top));
    }

    #[test]
    fn spectrum_rejects_asymmetric_matrix() {
        let mut m = Matrix::zeros(2);
        m.set(0, 1, 1.0);
        assert!(mode_spectrum(&m).is_err());
    }

    #[test]
    fn critical_scale_paper_parameters() {
        let config = paper_config(2);
        let b = critical_scale(&config);
        assert_relative_eq!(b, (0.2_f64 / 3.5).powi(2).cbrt(), max_relative = 1e-14);
        assert!((b - 0.1484).abs() < 5e-4);
        // At b_crit the rocking mode frequency vanishes.
        let omega_sq = crate::scale::mode_frequency_sq(config.omega_ax_in.powi(2), config.omega_rad, b);
        assert!(omega_sq.abs() < 1e-10 * config.omega_rad.powi(2));
    }

    #[test]
    fn critical_scale_limits() {
        let config = TrapConfig::new(mg25(), 2, TAU * 0.2000001e6, TAU * 0.2e6).unwrap();
        assert_relative_eq!(critical_scale(&config), 1.0, max_relative = 1e-5);
        let stiff = TrapConfig::new(mg25(), 2, TAU * 3.5e9, TAU * 0.2e6).unwrap();
        assert!(critical_scale(&stiff) < 1e-2);
    }
}
