//! Semiclassical pair-creation exponents: the contour integral of the mode
//! frequency up to its complex turning point, and the quadratic-minimum
//! closed form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scale::CollisionModel;

/// A squared mode frequency that can be evaluated at complex times.
pub trait ComplexFrequencyProfile: Send + Sync {
    fn omega_sq_at(&self, z: Complex64) -> Complex64;

    /// d(W^2)/dz; default central difference suits analytic profiles.
    fn omega_sq_prime_at(&self, z: Complex64) -> Complex64 {
        let h = 1e-6 * (1.0 + z.norm());
        (self.omega_sq_at(z + h) - self.omega_sq_at(z - h)) / (2.0 * h)
    }

    /// Minimum of W^2 on the real axis (at t = 0 by convention) and the
    /// curvature K^2 = d^2(W^2)/dt^2 there.
    fn minimum_estimate(&self) -> (f64, f64);
}

/// Collision profile W^2(z) = W_in^2 - dW^2 sech^2(w z), analytic in the strip
/// that contains the straight contour to the turning point.
#[derive(Debug, Clone, Copy)]
pub struct CollisionFrequencyProfile {
    pub omega_in_sq: f64,
    pub delta_omega_col_sq: f64,
    pub omega_col: f64,
}

impl CollisionFrequencyProfile {
    pub fn new(model: &CollisionModel, omega_in: f64) -> Result<Self> {
        if !(omega_in > 0.0) {
            return Err(Error::InvalidInput {
                what: "collision frequency profile",
                why: "omega_in must be positive".into(),
            });
        }
        Ok(CollisionFrequencyProfile {
            omega_in_sq: omega_in * omega_in,
            delta_omega_col_sq: model.delta_omega_col_sq,
            omega_col: model.omega_col,
        })
    }
}

impl ComplexFrequencyProfile for CollisionFrequencyProfile {
    fn omega_sq_at(&self, z: Complex64) -> Complex64 {
        let c = (self.omega_col * z).cosh();
        self.omega_in_sq - self.delta_omega_col_sq / (c * c)
    }

    fn omega_sq_prime_at(&self, z: Complex64) -> Complex64 {
        let s = self.omega_col * z;
        let sech = 1.0 / s.cosh();
        2.0 * self.delta_omega_col_sq * self.omega_col * sech * sech * s.tanh()
    }

    fn minimum_estimate(&self) -> (f64, f64) {
        // sech^2 = 1 - s^2 + O(s^4) about the minimum
        (
            self.omega_in_sq - self.delta_omega_col_sq,
            2.0 * self.delta_omega_col_sq * self.omega_col * self.omega_col,
        )
    }
}

/// Pure quadratic profile W^2 = W_min^2 + K^2 t^2 / 2.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticFrequencyProfile {
    pub omega_min_sq: f64,
    pub curvature_sq: f64,
}

impl ComplexFrequencyProfile for QuadraticFrequencyProfile {
    fn omega_sq_at(&self, z: Complex64) -> Complex64 {
        self.omega_min_sq + 0.5 * self.curvature_sq * z * z
    }

    fn omega_sq_prime_at(&self, z: Complex64) -> Complex64 {
        self.curvature_sq * z
    }

    fn minimum_estimate(&self) -> (f64, f64) {
        (self.omega_min_sq, self.curvature_sq)
    }
}

/// Result of the contour evaluation.
#[derive(Debug, Clone, Copy)]
pub struct WkbEstimate {
    /// ln of the proportionality: |beta|^2 ~ exp(exponent). Negative.
    pub exponent: f64,
    /// Root of W^2 in the upper half plane.
    pub turning_point: Complex64,
    /// max |dW/dt| / W^2 sampled on the real slowness window.
    pub max_slowness: f64,
    /// False when the slow-evolution assumption is visibly violated.
    pub assumptions_ok: bool,
}

const SLOWNESS_LIMIT: f64 = 0.1;

/// Exponent of the pair-creation suppression:
/// -4 Im of the integral of W(t) from 0 to the complex turning point t*.
///
/// The turning point is located by damped Newton iteration seeded from the
/// quadratic estimate t* ~ i sqrt(2) W_min / K; the contour is the straight
/// line 0 -> t* with the square-root singularity absorbed by a quadratic
/// endpoint substitution.
pub fn wkb_beta_exponent(
    profile: &dyn ComplexFrequencyProfile,
    slowness_window: (f64, f64),
) -> Result<WkbEstimate> {
    let (omega_min_sq, curvature_sq) = profile.minimum_estimate();
    if !(omega_min_sq > 0.0) {
        return Err(Error::RegimeViolation(format!(
            "profile minimum must stay positive, got W_min^2 = {omega_min_sq:.3e}"
        )));
    }
    if !(curvature_sq > 0.0) {
        return Err(Error::RegimeViolation(
            "profile needs positive curvature at its minimum".into(),
        ));
    }

    // Damped Newton from the quadratic seed. The seed can overshoot past a
    // pole of the profile and land in the basin of a farther root, so several
    // scaled-down seeds are tried and the root closest to the real axis wins.
    let seed = Complex64::new(0.0, (2.0 * omega_min_sq).sqrt() / curvature_sq.sqrt());
    let tol = 1e-13 * omega_min_sq.max(profile.omega_sq_at(Complex64::new(0.0, 0.0)).norm());
    const MAX_ITER: usize = 100;
    let mut best: Option<Complex64> = None;
    let mut last_residual = f64::INFINITY;
    for scale in [1.0, 0.7, 0.5, 0.35, 0.25, 0.15] {
        let mut z = seed * scale;
        let mut f = profile.omega_sq_at(z);
        let mut converged = false;
        for _ in 0..MAX_ITER {
            if f.norm() <= tol {
                converged = true;
                break;
            }
            let fp = profile.omega_sq_prime_at(z);
            if fp.norm() == 0.0 {
                break;
            }
            let mut step = f / fp;
            let mut accepted = false;
            for _ in 0..12 {
                let trial = z - step;
                let ft = profile.omega_sq_at(trial);
                if ft.norm() < f.norm() {
                    z = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        last_residual = last_residual.min(f.norm());
        if converged {
            // roots of a real profile come in conjugate pairs; keep the upper one
            let root = if z.im < 0.0 { z.conj() } else { z };
            if root.im > 0.0 && best.map_or(true, |b| root.im < b.im) {
                best = Some(root);
            }
        }
    }
    let turning_point = best.ok_or(Error::TurningPointNotConverged {
        iterations: MAX_ITER,
        residual: last_residual,
    })?;

    // contour integral with t(s) = t* (2s - s^2), dt = 2 t* (1 - s) ds;
    // the integrand vanishes linearly at s = 1, removing the sqrt singularity
    let (nodes, weights) = gauss_legendre_unit(64);
    let mut integral = Complex64::new(0.0, 0.0);
    let mut prev_root: Option<Complex64> = None;
    for (&s, &w) in nodes.iter().zip(weights.iter()) {
        let t = turning_point * (2.0 * s - s * s);
        let dt_ds = turning_point * 2.0 * (1.0 - s);
        let mut root = profile.omega_sq_at(t).sqrt();
        // keep the branch continuous along the contour
        if let Some(prev) = prev_root {
            if (root + prev).norm() < (root - prev).norm() {
                root = -root;
            }
        }
        prev_root = Some(root);
        integral += w * root * dt_ds;
    }
    let exponent = -4.0 * integral.im;

    // slowness on the real window
    let mut max_slowness: f64 = 0.0;
    let (a, b) = slowness_window;
    if b > a {
        for i in 0..=256 {
            let t = a + (b - a) * i as f64 / 256.0;
            let w_sq = profile.omega_sq_at(Complex64::new(t, 0.0)).re;
            if w_sq <= 0.0 {
                max_slowness = f64::INFINITY;
                break;
            }
            let d = profile.omega_sq_prime_at(Complex64::new(t, 0.0)).re;
            max_slowness = max_slowness.max(d.abs() / (2.0 * w_sq.powf(1.5)));
        }
    }

    Ok(WkbEstimate {
        exponent,
        turning_point,
        max_slowness,
        assumptions_ok: max_slowness <= SLOWNESS_LIMIT,
    })
}

/// Closed-form exponent for a quadratic minimum:
/// -sqrt(2) pi W_min^2 / K.
pub fn taylor_wkb_exponent(omega_min_sq: f64, curvature_sq: f64) -> Result<f64> {
    if !(omega_min_sq > 0.0) || !(curvature_sq > 0.0) {
        return Err(Error::InvalidInput {
            what: "quadratic exponent",
            why: "omega_min_sq and curvature_sq must be positive".into(),
        });
    }
    Ok(-std::f64::consts::SQRT_2 * std::f64::consts::PI * omega_min_sq / curvature_sq.sqrt())
}

/// Gauss-Legendre nodes and weights on [0, 1].
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // Newton iteration on P_n from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[n - 1 - k] = 0.5 * (x + 1.0);
        weights[n - 1 - k] = 0.5 * w;
    }
    (nodes, weights)
}

/// Legendre polynomial P_n and derivative at x by recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
