//! Gaussian two-mode machinery for the radial modes of two ions: covariance
//! matrices, the ion/normal basis change, squeezing symplectics, partial
//! transpose, symplectic eigenvalues, the entanglement criterion, and the
//! entanglement of formation.
//!
//! Phase space ordering is (y1, p1, y2, p2) in the ion basis and
//! (y+, p+, y-, p-) in the normal basis; units fix the vacuum covariance at
//! identity / 2.

use num_complex::Complex64;

use crate::bogoliubov::BogoliubovCoefficients;
use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, Matrix};

/// Phase-space basis a covariance matrix refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Individual ion coordinates (y1, p1, y2, p2).
    Ion,
    /// Center-of-mass / rocking combinations (y+, p+, y-, p-).
    Normal,
}

/// 4x4 symmetric second-moment matrix of the two radial modes.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    sigma: Matrix,
    basis: Basis,
}

impl CovarianceMatrix {
    /// Validates symmetry and the uncertainty relation (all symplectic
    /// eigenvalues at least 1/2, up to 1e-10).
    pub fn new(sigma: Matrix, basis: Basis) -> Result<Self> {
        if sigma.n() != 4 {
            return Err(Error::InvalidInput {
                what: "covariance matrix",
                why: format!("must be 4x4, got {0}x{0}", sigma.n()),
            });
        }
        if !sigma.is_symmetric(1e-12) {
            return Err(Error::InvalidInput {
                what: "covariance matrix",
                why: "must be symmetric to 1e-12".into(),
            });
        }
        let cov = CovarianceMatrix { sigma, basis };
        let (_, nu_min) = symplectic_eigenvalues(&cov)?;
        if nu_min < 0.5 - 1e-10 {
            return Err(Error::InvalidInput {
                what: "covariance matrix",
                why: format!("uncertainty relation violated: min symplectic eigenvalue {nu_min}"),
            });
        }
        Ok(cov)
    }

    fn from_parts(sigma: Matrix, basis: Basis) -> Self {
        CovarianceMatrix { sigma, basis }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.sigma
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }
}

/// Thermal occupations of the two normal modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalOccupation {
    pub n_plus: f64,
    pub n_minus: f64,
}

impl ThermalOccupation {
    pub fn new(n_plus: f64, n_minus: f64) -> Result<Self> {
        if !(n_plus >= 0.0) || !(n_minus >= 0.0) {
            return Err(Error::InvalidInput {
                what: "thermal occupation",
                why: "occupations must be non-negative".into(),
            });
        }
        Ok(ThermalOccupation { n_plus, n_minus })
    }

    /// Bose-Einstein occupations of the two modes at temperature `t` (K).
    pub fn from_temperature(t: f64, omega_plus: f64, omega_minus: f64) -> Result<Self> {
        Ok(ThermalOccupation {
            n_plus: bose_occupation(t, omega_plus)?,
            n_minus: bose_occupation(t, omega_minus)?,
        })
    }
}

/// Bose-Einstein occupation 1 / (exp(hbar w / kB T) - 1); zero at T = 0.
pub fn bose_occupation(temperature: f64, omega: f64) -> Result<f64> {
    if !(temperature >= 0.0) || !(omega > 0.0) {
        return Err(Error::InvalidInput {
            what: "Bose occupation",
            why: "need temperature >= 0 and omega > 0".into(),
        });
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (BOLTZMANN * temperature);
    if x > 700.0 {
        return Ok(0.0);
    }
    Ok(1.0 / x.exp_m1())
}

/// Thermal covariance in the normal basis:
/// diag((1 + 2 n+)/2 twice, (1 + 2 n-)/2 twice).
pub fn thermal_covariance(occ: &ThermalOccupation) -> CovarianceMatrix {
    let a = 0.5 * (1.0 + 2.0 * occ.n_plus);
    let b = 0.5 * (1.0 + 2.0 * occ.n_minus);
    let mut m = Matrix::zeros(4);
    m.set(0, 0, a);
    m.set(1, 1, a);
    m.set(2, 2, b);
    m.set(3, 3, b);
    CovarianceMatrix::from_parts(m, Basis::Normal)
}

/// Orthogonal involution mapping ion to normal phase-space coordinates.
fn basis_change_matrix() -> Matrix {
    let s = 1.0 / 2.0_f64.sqrt();
    Matrix::from_rows(&[
        &[s, 0.0, s, 0.0],
        &[0.0, s, 0.0, s],
        &[s, 0.0, -s, 0.0],
        &[0.0, s, 0.0, -s],
    ])
}

/// Symplectic form for the (q, p, q, p) ordering.
fn symplectic_form() -> Matrix {
    Matrix::from_rows(&[
        &[0.0, 1.0, 0.0, 0.0],
        &[-1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, -1.0, 0.0],
    ])
}

/// Conjugate by the involution D, switching between the ion and normal bases.
pub fn basis_change(sigma: &CovarianceMatrix) -> CovarianceMatrix {
    let d = basis_change_matrix();
    let m = d.matmul(sigma.matrix()).matmul(&d);
    let basis = match sigma.basis() {
        Basis::Ion => Basis::Normal,
        Basis::Normal => Basis::Ion,
    };
    CovarianceMatrix::from_parts(m, basis)
}

/// What a symplectic transform was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    BasisChange,
    Squeeze,
    Composite,
}

/// Real 4x4 symplectic transform acting on phase-space covariances.
#[derive(Debug, Clone)]
pub struct SymplecticTransform {
    matrix: Matrix,
    kind: TransformKind,
}

impl SymplecticTransform {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    /// The basis-change involution D as a transform.
    pub fn basis_change() -> Self {
        SymplecticTransform { matrix: basis_change_matrix(), kind: TransformKind::BasisChange }
    }

    /// Left-composition: self applied after `first`.
    pub fn compose(&self, first: &SymplecticTransform) -> SymplecticTransform {
        SymplecticTransform {
            matrix: self.matrix.matmul(&first.matrix),
            kind: TransformKind::Composite,
        }
    }

    /// || S J S^T - J ||_max, zero for an exact symplectic matrix.
    pub fn symplectic_defect(&self) -> f64 {
        let j = symplectic_form();
        self.matrix.matmul(&j).matmul(&self.matrix.transpose()).sub(&j).max_abs()
    }
}

/// Block-diagonal squeezing transform in the normal basis: the + mode only
/// rotates (|alpha+| = 1), the - mode carries the Bogoliubov pair.
pub fn squeeze_transform(
    minus: &BogoliubovCoefficients,
    alpha_plus: Complex64,
) -> Result<SymplecticTransform> {
    let violation = minus.normalization_violation();
    if violation > 1e-8 {
        return Err(Error::NormalizationViolation { violation });
    }
    let plus_defect = (alpha_plus.norm() - 1.0).abs();
    if plus_defect > 1e-8 {
        return Err(Error::InvalidInput {
            what: "squeeze transform",
            why: format!("|alpha_plus| must be 1, off by {plus_defect:.3e}"),
        });
    }
    let (a, b) = (minus.alpha, minus.beta);
    let amb = a - b;
    let apb = a + b;
    let m = Matrix::from_rows(&[
        &[alpha_plus.re, alpha_plus.im, 0.0, 0.0],
        &[-alpha_plus.im, alpha_plus.re, 0.0, 0.0],
        &[0.0, 0.0, amb.re, apb.im],
        &[0.0, 0.0, -amb.im, apb.re],
    ]);
    Ok(SymplecticTransform { matrix: m, kind: TransformKind::Squeeze })
}

/// Congruence transform sigma -> S sigma S^T in the basis sigma lives in.
pub fn evolve_covariance(
    sigma: &CovarianceMatrix,
    transform: &SymplecticTransform,
) -> CovarianceMatrix {
    let s = &transform.matrix;
    let m = s.matmul(sigma.matrix()).matmul(&s.transpose());
    CovarianceMatrix::from_parts(m, sigma.basis())
}

/// Symplectic spectrum of a covariance matrix (no partial transpose):
/// (nu_plus, nu_minus), both positive, nu_plus >= nu_minus.
///
/// Computed as the spectrum of i J sigma through the antisymmetric similarity
/// sigma^(1/2) J sigma^(1/2), whose eigenvalues are exactly +/- i nu.
pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<(f64, f64)> {
    symplectic_spectrum(sigma.matrix())
}

fn symplectic_spectrum(sigma: &Matrix) -> Result<(f64, f64)> {
    let eig = jacobi_eigen(sigma);
    let scale = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    if eig.values.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidInput {
            what: "covariance matrix",
            why: format!("matrix is not positive definite, eigenvalues {:?}", eig.values),
        });
    }
    // sigma^(1/2)
    let mut root = Matrix::zeros(4);
    for k in 0..4 {
        root.set(k, k, eig.values[k].sqrt());
    }
    let half = eig.vectors.matmul(&root).matmul(&eig.vectors.transpose());
    let a = half.matmul(&symplectic_form()).matmul(&half);
    // -A^2 = A^T A is symmetric positive with doubly degenerate eigenvalues nu^2
    let g = a.transpose().matmul(&a);
    let gev = jacobi_eigen(&g);
    let v = &gev.values;
    // pairing sanity: the four eigenvalues come in two duplicated pairs
    let pairing = ((v[0] - v[1]).abs().max((v[2] - v[3]).abs())) / scale.powi(2).max(1e-300);
    if pairing > 1e-10 {
        return Err(Error::InvalidInput {
            what: "covariance matrix",
            why: format!("symplectic pairing violated: eigenvalues {v:?}"),
        });
    }
    let nu_minus = (0.5 * (v[0] + v[1])).max(0.0).sqrt();
    let nu_plus = (0.5 * (v[2] + v[3])).max(0.0).sqrt();
    Ok((nu_plus, nu_minus))
}

/// Symplectic eigenvalues of the partially transposed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtSymplecticEigenvalues {
    pub plus: f64,
    pub minus: f64,
}

/// Partial transpose (momentum flip of ion 1) followed by the symplectic
/// spectrum. Requires the ion basis.
pub fn pt_symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<PtSymplecticEigenvalues> {
    if sigma.basis() != Basis::Ion {
        return Err(Error::InvalidInput {
            what: "partial transpose",
            why: "covariance matrix must be in the ion basis".into(),
        });
    }
    let mut t = Matrix::identity(4);
    t.set(1, 1, -1.0);
    let pt = t.matmul(sigma.matrix()).matmul(&t);
    let (plus, minus) = symplectic_spectrum(&pt)?;
    Ok(PtSymplecticEigenvalues { plus, minus })
}

/// Separability verdict with the distance to the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementVerdict {
    pub entangled: bool,
    /// 1/2 - lambda_minus^PT; positive margins mean entangled.
    pub margin: f64,
    pub lambda_minus: f64,
}

/// Entangled iff the smaller PT symplectic eigenvalue drops below 1/2.
pub fn is_entangled(sigma: &CovarianceMatrix) -> Result<EntanglementVerdict> {
    let pt = pt_symplectic_eigenvalues(sigma)?;
    Ok(EntanglementVerdict {
        entangled: pt.minus < 0.5,
        margin: 0.5 - pt.minus,
        lambda_minus: pt.minus,
    })
}

/// True when the two diagonal 2x2 blocks of the ion-basis covariance have
/// equal determinants (the symmetric-squeezing precondition for the
/// entanglement of formation).
pub fn symmetric_squeezing(sigma: &CovarianceMatrix) -> Result<bool> {
    if sigma.basis() != Basis::Ion {
        return Err(Error::InvalidInput {
            what: "symmetric squeezing check",
            why: "covariance matrix must be in the ion basis".into(),
        });
    }
    let m = sigma.matrix();
    let det_a = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
    let det_b = m.get(2, 2) * m.get(3, 3) - m.get(2, 3) * m.get(3, 2);
    let scale = det_a.abs().max(det_b.abs()).max(1e-300);
    Ok((det_a - det_b).abs() <= 1e-10 * scale)
}

/// Entanglement of formation of a symmetric two-mode Gaussian state as a
/// function of the smaller PT symplectic eigenvalue. Zero at and above 1/2.
pub fn entanglement_of_formation(lambda_minus_pt: f64) -> Result<f64> {
    if !(lambda_minus_pt > 0.0) {
        return Err(Error::InvalidInput {
            what: "entanglement of formation",
            why: format!("lambda must be positive, got {lambda_minus_pt}"),
        });
    }
    if lambda_minus_pt >= 0.5 {
        return Ok(0.0);
    }
    let x = lambda_minus_pt;
    let gp = (0.5 + x) * (0.5 + x) / (2.0 * x);
    let gm = (0.5 - x) * (0.5 - x) / (2.0 * x);
    Ok(gp * gp.ln() - gm * gm.ln())
}

/// Leading-order thermal density matrix components and both entanglement
/// verdicts for small occupations and squeezing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbativeState {
    /// Weight of |0,0><0,0|: 1 - n_th.
    pub weight_vacuum: f64,
    /// Weight of the single excitation on either ion: n_th / 2 each.
    pub weight_single: f64,
    /// First-order criterion |xi| > n_th.
    pub first_order_entangled: bool,
    /// Exact Gaussian criterion with n+ = n- = n_th / 2.
    pub exact_entangled: bool,
    /// False when the inputs leave the perturbative regime.
    pub regime_ok: bool,
    pub verdicts_agree: bool,
}

/// Compare the first-order entanglement criterion against the exact Gaussian
/// one for a symmetric thermal state with total occupation `n_th`.
pub fn perturbative_state(n_th: f64, xi_minus: Complex64) -> Result<PerturbativeState> {
    if !(n_th >= 0.0) {
        return Err(Error::InvalidInput {
            what: "perturbative state",
            why: "n_th must be non-negative".into(),
        });
    }
    let xi = xi_minus.norm();
    let first_order_entangled = xi > n_th;
    // n+ = n- = n_th/2: sqrt(1+2n+) sqrt(1+2n-) e^{-|xi|} < 1
    let exact_entangled = (1.0 + n_th) * (-xi).exp() < 1.0;
    Ok(PerturbativeState {
        weight_vacuum: 1.0 - n_th,
        weight_single: 0.5 * n_th,
        first_order_entangled,
        exact_entangled,
        regime_ok: n_th <= 0.1 && xi <= 0.5,
        verdicts_agree: first_order_entangled == exact_entangled,
    })
}

/// Closed-form PT symplectic eigenvalues of a squeezed symmetric thermal
/// state; the oracle counterpart of `pt_symplectic_eigenvalues`.
pub fn pt_eigenvalues_closed_form(n_plus: f64, n_minus: f64, xi_abs: f64) -> (f64, f64) {
    let root = ((1.0 + 2.0 * n_plus) * (1.0 + 2.0 * n_minus)).sqrt();
    (0.5 * root * xi_abs.exp(), 0.5 * root * (-xi_abs).exp())
}
