//! Mode-function integration, Bogoliubov coefficient extraction, and the
//! closed-form / approximate pair-creation coefficients for the collision and
//! expansion drives.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{integrate, DenseOutput, OdeOptions};
use crate::scale::{mode_frequency_sq, CollisionModel, ExpansionModel, ScaleFunction};
use crate::trap::ModeSpectrum;

/// A time-dependent squared mode frequency.
pub trait FrequencyProfile: Send + Sync {
    fn omega_sq(&self, t: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Send + Sync> FrequencyProfile for F {
    fn omega_sq(&self, t: f64) -> f64 {
        self(t)
    }
}

/// Mode frequency driven by a scale function:
/// omega_rad^2 - omega_kappa^2 / b(t)^3.
pub struct ModeProfile<S: ScaleFunction> {
    pub scale: S,
    pub omega_rad: f64,
    pub omega_kappa_sq: f64,
}

impl<S: ScaleFunction> FrequencyProfile for ModeProfile<S> {
    fn omega_sq(&self, t: f64) -> f64 {
        mode_frequency_sq(self.omega_kappa_sq, self.omega_rad, self.scale.scale_at(t).b)
    }
}

/// Tolerances for one mode integration.
#[derive(Debug, Clone)]
pub struct ModeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Stationarity requirement |dW/dt| / W^2 at the window edges.
    pub stationarity_tol: f64,
    /// Samples used by the instability pre-scan of the profile.
    pub scan_points: usize,
}

impl Default for ModeOptions {
    fn default() -> Self {
        ModeOptions { rtol: 1e-12, atol: 1e-14, stationarity_tol: 1e-6, scan_points: 4096 }
    }
}

/// Complex mode function on the integration window, normalized to the
/// positive-frequency in-solution at t_in.
///
/// State layout: [Re c, Im c, Re c_dot, Im c_dot], stored in SI units.
#[derive(Debug)]
pub struct ModeSolution {
    dense: DenseOutput<4>,
    omega_in: f64,
    omega_out: f64,
    wronskian_drift: f64,
}

impl ModeSolution {
    pub fn t_in(&self) -> f64 {
        self.dense.t_start()
    }

    pub fn t_out(&self) -> f64 {
        self.dense.t_end()
    }

    pub fn omega_in(&self) -> f64 {
        self.omega_in
    }

    pub fn omega_out(&self) -> f64 {
        self.omega_out
    }

    /// Grid of accepted solver steps (s).
    pub fn grid(&self) -> &[f64] {
        self.dense.times()
    }

    /// Mode function and derivative at `t`.
    pub fn eval(&self, t: f64) -> (Complex64, Complex64) {
        let y = self.dense.eval(t);
        (Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
    }

    /// Largest relative drift of the conserved Wronskian along the grid.
    pub fn wronskian_drift(&self) -> f64 {
        self.wronskian_drift
    }
}

/// Stationary-window helper for the model drives: the window starts one
/// settle time before the transition and ends a settle time plus a few final
/// oscillation periods after it, so the out-state can be sampled over one
/// full period of stationary evolution.
pub fn stationary_window(settle_time: f64, omega_out: f64) -> (f64, f64) {
    (-settle_time, settle_time + 2.5 * std::f64::consts::TAU / omega_out)
}

/// Integrate (d^2/dt^2 + W^2(t)) c = 0 with the positive-frequency initial
/// condition c(t_in) = exp(-i W_in t_in) / sqrt(2 W_in).
///
/// Errors when W^2 crosses zero inside the window (radial instability) or when
/// the profile is not stationary at the window edges.
pub fn integrate_mode(
    profile: &dyn FrequencyProfile,
    window: (f64, f64),
    opts: &ModeOptions,
) -> Result<ModeSolution> {
    let (t_in, t_out) = window;
    if !(t_out > t_in) || !t_in.is_finite() || !t_out.is_finite() {
        return Err(Error::InvalidInput {
            what: "mode integration window",
            why: format!("window [{t_in}, {t_out}] must be finite and ordered"),
        });
    }
    let w_in_sq = profile.omega_sq(t_in);
    let w_out_sq = profile.omega_sq(t_out);
    if !(w_in_sq > 0.0) || !(w_out_sq > 0.0) {
        return Err(Error::ModeUnstable { t: if w_in_sq > 0.0 { t_out } else { t_in } });
    }

    // instability pre-scan with bisection refinement of the first crossing
    let n = opts.scan_points.max(2);
    let h = (t_out - t_in) / (n - 1) as f64;
    let mut prev_t = t_in;
    let mut prev_v = w_in_sq;
    for i in 1..n {
        let t = t_in + i as f64 * h;
        let v = profile.omega_sq(t);
        if v <= 0.0 {
            let (mut lo, mut hi) = (prev_t, t);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if profile.omega_sq(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Err(Error::ModeUnstable { t: 0.5 * (lo + hi) });
        }
        prev_t = t;
        prev_v = v;
    }
    let _ = (prev_t, prev_v);

    // stationarity at the edges
    for &t_edge in &[t_in, t_out] {
        let slowness = edge_slowness(profile, t_edge, (t_in, t_out));
        if slowness > opts.stationarity_tol {
            return Err(Error::NotStationary { t: t_edge, slowness, limit: opts.stationarity_tol });
        }
    }

    let omega_in = w_in_sq.sqrt();
    let omega_out = w_out_sq.sqrt();

    // dimensionless time tau = omega_in * t, u = c * sqrt(2 omega_in)
    let tau_span = (omega_in * t_in, omega_in * t_out);
    let rhs = |tau: f64, y: &[f64; 4]| -> [f64; 4] {
        let ratio = profile.omega_sq(tau / omega_in) / w_in_sq;
        [y[2], y[3], -ratio * y[0], -ratio * y[1]]
    };
    let u0 = Complex64::from_polar(1.0, -tau_span.0);
    let du0 = Complex64::new(0.0, -1.0) * u0;
    let y0 = [u0.re, u0.im, du0.re, du0.im];
    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_max: Some((tau_span.1 - tau_span.0) / 64.0),
        ..OdeOptions::default()
    };
    let run = integrate(rhs, tau_span, y0, &ode_opts, |_, _| false)
        .map_err(|e| rescale_mode_error(e, omega_in))?;

    // back to SI: c = u / sqrt(2 omega_in), d/dt = omega_in d/dtau
    let norm = 1.0 / (2.0 * omega_in).sqrt();
    let mut dense = run.dense.rescale_time(omega_in, 0.0);
    scale_mode_state(&mut dense, norm, omega_in);

    // Wronskian conservation: Im(conj(c) c_dot) = -1/2 throughout
    let mut drift: f64 = 0.0;
    for y in dense.states() {
        let c = Complex64::new(y[0], y[1]);
        let cd = Complex64::new(y[2], y[3]);
        let w = (c.conj() * cd).im;
        drift = drift.max((w + 0.5).abs() / 0.5);
    }

    Ok(ModeSolution { dense, omega_in, omega_out, wronskian_drift: drift })
}

fn scale_mode_state(dense: &mut DenseOutput<4>, norm: f64, omega_in: f64) {
    // u and u' were integrated in tau units; rescale_time already converted
    // the stored derivatives d/dtau -> d/dt. Remaining: c = u * norm and the
    // velocity components carry one more factor of omega_in from c_dot = u' * omega_in * norm.
    let raw_states: Vec<[f64; 4]> = dense.states().to_vec();
    let raw_derivs: Vec<[f64; 4]> = dense.derivatives().to_vec();
    let times: Vec<f64> = dense.times().to_vec();
    let mut ys = Vec::with_capacity(raw_states.len());
    let mut dys = Vec::with_capacity(raw_states.len());
    for (y, d) in raw_states.iter().zip(raw_derivs.iter()) {
        ys.push([
            y[0] * norm,
            y[1] * norm,
            y[2] * norm * omega_in,
            y[3] * norm * omega_in,
        ]);
        dys.push([
            d[0] * norm,
            d[1] * norm,
            d[2] * norm * omega_in,
            d[3] * norm * omega_in,
        ]);
    }
    *dense = DenseOutput::from_parts(times, ys, dys);
}

fn rescale_mode_error(e: Error, omega: f64) -> Error {
    match e {
        Error::StepSizeUnderflow { t, h } => Error::StepSizeUnderflow { t: t / omega, h: h / omega },
        Error::MaxStepsExceeded { t, max_steps } => {
            Error::MaxStepsExceeded { t: t / omega, max_steps }
        }
        other => other,
    }
}

fn edge_slowness(profile: &dyn FrequencyProfile, t: f64, window: (f64, f64)) -> f64 {
    let w_sq = profile.omega_sq(t);
    let omega = w_sq.sqrt();
    // |dW/dt| / W^2 = |d(W^2)/dt| / (2 W^3), central difference over a small
    // fraction of the local period. The step must stay well below any profile
    // feature, so it is also capped by a fraction of the window span.
    let h = (1e-3 * std::f64::consts::TAU / omega).min(1e-5 * (window.1 - window.0));
    let (a, b) = if t - h < window.0 {
        (t, t + h)
    } else if t + h > window.1 {
        (t - h, t)
    } else {
        (t - h, t + h)
    };
    let dw_sq = (profile.omega_sq(b) - profile.omega_sq(a)) / (b - a);
    dw_sq.abs() / (2.0 * omega * w_sq)
}

/// Complex Bogoliubov pair linking the in and out ladder operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovCoefficients {
    pub alpha: Complex64,
    pub beta: Complex64,
    /// Normal-mode index this pair belongs to, when known.
    pub mode_index: Option<usize>,
}

impl BogoliubovCoefficients {
    pub fn beta_sq(&self) -> f64 {
        self.beta.norm_sqr()
    }

    /// | |alpha|^2 - |beta|^2 - 1 |, zero for an exact transformation.
    pub fn normalization_violation(&self) -> f64 {
        (self.alpha.norm_sqr() - self.beta.norm_sqr() - 1.0).abs()
    }
}

/// Project the mode solution onto positive/negative frequency parts at the
/// out frequency. Samples are averaged over eight times spanning one final
/// period to suppress residual numerical ripple.
pub fn extract_bogoliubov(solution: &ModeSolution) -> Result<BogoliubovCoefficients> {
    let omega = solution.omega_out();
    let period = std::f64::consts::TAU / omega;
    if solution.t_out() - period < solution.t_in() {
        return Err(Error::InvalidInput {
            what: "Bogoliubov extraction",
            why: "window shorter than one out-state period".into(),
        });
    }
    let mut alpha = Complex64::new(0.0, 0.0);
    let mut beta = Complex64::new(0.0, 0.0);
    let mut invariant = 0.0;
    const SAMPLES: usize = 8;
    for j in 0..SAMPLES {
        let t = solution.t_out() - j as f64 * period / SAMPLES as f64;
        let (a, b) = decompose_at(solution, t, omega);
        // each single-time pair satisfies |a|^2 - |b|^2 = 1 up to integration
        // error; the sample mean of the invariant isolates that error from the
        // sample-to-sample wobble of a merely quasi-stationary out-state
        invariant += a.norm_sqr() - b.norm_sqr();
        alpha += a;
        beta += b;
    }
    alpha /= SAMPLES as f64;
    beta /= SAMPLES as f64;
    invariant /= SAMPLES as f64;

    let violation = (invariant - 1.0).abs();
    if violation > 1e-6 {
        return Err(Error::NormalizationViolation { violation });
    }
    Ok(BogoliubovCoefficients { alpha, beta, mode_index: None })
}

/// Single-time algebraic projection at frequency `omega`.
pub fn decompose_at(solution: &ModeSolution, t: f64, omega: f64) -> (Complex64, Complex64) {
    let (c, cd) = solution.eval(t);
    let i = Complex64::new(0.0, 1.0);
    let root = (omega / 2.0).sqrt();
    let alpha = root * (c + i * cd / omega) * Complex64::from_polar(1.0, omega * t);
    let beta = root * (c - i * cd / omega) * Complex64::from_polar(1.0, -omega * t);
    (alpha, beta)
}

/// Mean number of created phonons for a mode starting in its ground state.
pub fn mean_phonons(coeffs: &BogoliubovCoefficients) -> f64 {
    coeffs.beta_sq()
}

/// Complex squeezing parameter of the two-phonon squeeze operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingParameter {
    pub xi: Complex64,
}

impl SqueezingParameter {
    pub fn magnitude(&self) -> f64 {
        self.xi.norm()
    }
}

/// |xi| = asinh |beta|, arg xi = -(arg alpha + arg beta); beta = 0 maps to
/// xi = 0 with the phase fixed to zero.
pub fn squeezing_from_bogoliubov(coeffs: &BogoliubovCoefficients) -> SqueezingParameter {
    let b = coeffs.beta.norm();
    if b == 0.0 {
        return SqueezingParameter { xi: Complex64::new(0.0, 0.0) };
    }
    let magnitude = b.asinh();
    let phase = -(coeffs.alpha.arg() + coeffs.beta.arg());
    SqueezingParameter { xi: Complex64::from_polar(magnitude, phase) }
}

/// First-order squeezed-state Fock amplitudes, normalized after truncation.
#[derive(Debug, Clone)]
pub struct SqueezedStateAmplitudes {
    /// Amplitude of |n> at index n.
    pub amplitudes: Vec<Complex64>,
    /// False when |xi| exceeds the perturbative bound 0.5.
    pub perturbative: bool,
}

/// Perturbative expansion of the squeezed vacuum: proportional to
/// |0> + (xi / sqrt(2)) |2>, truncated at Fock index `truncation`.
pub fn squeezed_state_amplitudes(
    xi: &SqueezingParameter,
    truncation: usize,
) -> SqueezedStateAmplitudes {
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); truncation + 1];
    amplitudes[0] = Complex64::new(1.0, 0.0);
    if truncation >= 2 {
        amplitudes[2] = xi.xi / 2.0_f64.sqrt();
    }
    let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in amplitudes.iter_mut() {
        *a /= norm;
    }
    SqueezedStateAmplitudes { amplitudes, perturbative: xi.magnitude() <= 0.5 }
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn ln_sinh(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2
}

/// ln |beta|^2 for the sech^2 collision profile; -inf when the coefficient
/// vanishes. Evaluated in log space so deep suppression never overflows.
pub fn analytic_collision_log_beta_sq(
    delta_omega_col_sq: f64,
    omega_col: f64,
    omega_in: f64,
) -> Result<f64> {
    if !(omega_col > 0.0) || !(omega_in > 0.0) || !(delta_omega_col_sq >= 0.0) {
        return Err(Error::InvalidInput {
            what: "collision coefficient",
            why: "omega_col and omega_in must be positive, delta_omega_col_sq non-negative".into(),
        });
    }
    let r = 4.0 * delta_omega_col_sq / (omega_col * omega_col) - 1.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    // complex-safe numerator: cosh((pi/2) sqrt(r)) continues to cos for r < 0
    let ln_num = if r >= 0.0 {
        ln_cosh(half_pi * r.sqrt())
    } else {
        let v = (half_pi * (-r).sqrt()).cos().abs();
        if v == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        v.ln()
    };
    let ln_den = ln_sinh(std::f64::consts::PI * omega_in / omega_col);
    Ok(2.0 * (ln_num - ln_den))
}

/// |beta|^2 for the sech^2 collision profile (paper closed form).
pub fn analytic_collision_beta_sq(
    delta_omega_col_sq: f64,
    omega_col: f64,
    omega_in: f64,
) -> Result<f64> {
    Ok(analytic_collision_log_beta_sq(delta_omega_col_sq, omega_col, omega_in)?.exp())
}

/// Collision coefficient for mode kappa of a chain: the in-frequency is
/// sqrt(omega_rad^2 - omega_kappa^2) at b = 1.
pub fn collision_beta_sq_for_mode(
    model: &CollisionModel,
    omega_rad: f64,
    omega_kappa_sq: f64,
) -> Result<f64> {
    let omega_in_sq = omega_rad * omega_rad - omega_kappa_sq;
    if !(omega_in_sq > 0.0) {
        return Err(Error::RegimeViolation(format!(
            "mode lies above the radial confinement: omega_rad^2 - omega_kappa^2 = {omega_in_sq:.3e}"
        )));
    }
    analytic_collision_beta_sq(model.delta_omega_col_sq, model.omega_col, omega_in_sq.sqrt())
}

/// ln |beta|^2 for the tanh expansion profile.
pub fn analytic_expansion_log_beta_sq(
    delta_omega_ex_sq: f64,
    omega_ex: f64,
    omega_in: f64,
) -> Result<f64> {
    if !(omega_ex > 0.0) || !(omega_in > 0.0) {
        return Err(Error::InvalidInput {
            what: "expansion coefficient",
            why: "omega_ex and omega_in must be positive".into(),
        });
    }
    let omega_out_sq = omega_in * omega_in + delta_omega_ex_sq;
    if !(omega_out_sq > 0.0) {
        return Err(Error::RegimeViolation(format!(
            "expansion drives the mode unstable: omega_out^2 = {omega_out_sq:.3e}"
        )));
    }
    let omega_out = omega_out_sq.sqrt();
    if omega_out == omega_in {
        return Ok(f64::NEG_INFINITY);
    }
    let pi = std::f64::consts::PI;
    let x = pi * 0.5 * (omega_out - omega_in).abs() / omega_ex;
    Ok(2.0 * ln_sinh(x) - ln_sinh(pi * omega_in / omega_ex) - ln_sinh(pi * omega_out / omega_ex))
}

/// |beta|^2 for the tanh expansion profile (paper closed form).
pub fn analytic_expansion_beta_sq(
    delta_omega_ex_sq: f64,
    omega_ex: f64,
    omega_in: f64,
) -> Result<f64> {
    Ok(analytic_expansion_log_beta_sq(delta_omega_ex_sq, omega_ex, omega_in)?.exp())
}

/// Expansion coefficient for a model, taking the in-frequency directly.
pub fn expansion_beta_sq_for_mode(model: &ExpansionModel, omega_in: f64) -> Result<f64> {
    analytic_expansion_beta_sq(model.delta_omega_ex_sq, model.omega_ex, omega_in)
}

/// Instantaneous frequency jump: |beta|^2 = (W_out - W_in)^2 / (4 W_in W_out).
pub fn sudden_quench_beta_sq(omega_in: f64, omega_out: f64) -> Result<f64> {
    if !(omega_in > 0.0) || !(omega_out > 0.0) {
        return Err(Error::InvalidInput {
            what: "sudden quench",
            why: "both frequencies must be positive".into(),
        });
    }
    let d = omega_out - omega_in;
    Ok(d * d / (4.0 * omega_in * omega_out))
}

/// Collision-model surrogate built from the two dominant pulse parameters
/// p1 = (dx_eq / dx_min)^3 and p2 = (omega_ax(t_min) / omega_ax_in)^2.
#[derive(Debug, Clone)]
pub struct PairParameterEstimate {
    pub p1: f64,
    pub p2: f64,
    /// The equivalent sech^2 collision.
    pub model: CollisionModel,
    pub beta_sq: f64,
}

/// Approximate |beta_-|^2 of a generic two-ion collision from its geometry:
/// equilibrium and minimum separation plus the axial frequencies at the
/// turning point and asymptotically.
pub fn p1p2_beta_sq(
    delta_x_eq: f64,
    delta_x_min: f64,
    omega_ax_turn: f64,
    omega_ax_in: f64,
    omega_rad: f64,
) -> Result<PairParameterEstimate> {
    if !(delta_x_eq > 0.0) || !(delta_x_min > 0.0) {
        return Err(Error::InvalidInput {
            what: "pair-parameter estimate",
            why: "separations must be positive".into(),
        });
    }
    let p1 = (delta_x_eq / delta_x_min).powi(3);
    if p1 <= 1.0 {
        return Err(Error::RegimeViolation(format!(
            "p1 = {p1:.6} must exceed 1 (the ions must actually approach)"
        )));
    }
    let p2 = (omega_ax_turn / omega_ax_in).powi(2);
    let win2 = omega_ax_in * omega_ax_in;
    let delta_omega_col_sq = win2 * (p1 - 1.0);
    let omega_col_sq = win2 * 3.0 * p1 * (p1 - p2) / (2.0 * (p1 - 1.0));
    if !(omega_col_sq > 0.0) {
        return Err(Error::RegimeViolation(format!(
            "degenerate collision time scale: omega_col^2 = {omega_col_sq:.3e} (p1 = {p1:.4}, p2 = {p2:.4})"
        )));
    }
    let omega_in_sq = omega_rad * omega_rad - win2;
    if !(omega_in_sq > 0.0) {
        return Err(Error::RegimeViolation(
            "rocking mode requires omega_rad > omega_ax_in".into(),
        ));
    }
    let model = CollisionModel::new(delta_omega_col_sq, omega_col_sq.sqrt(), omega_ax_in)?;
    let beta_sq =
        analytic_collision_beta_sq(delta_omega_col_sq, omega_col_sq.sqrt(), omega_in_sq.sqrt())?;
    Ok(PairParameterEstimate { p1, p2, model, beta_sq })
}

/// Exponential suppression of pair creation in mode kappa during a model
/// collision: -2 pi (sqrt(omega_rad^2 - omega_kappa^2)
///                   - delta_omega_col * omega_kappa / omega_ax_in) / omega_col.
pub fn higher_mode_exponent(
    omega_kappa_sq: f64,
    omega_rad: f64,
    model: &CollisionModel,
) -> Result<f64> {
    let omega_in_sq = omega_rad * omega_rad - omega_kappa_sq;
    if !(omega_in_sq > 0.0) {
        return Err(Error::RegimeViolation(format!(
            "omega_rad^2 must exceed omega_kappa^2, got difference {omega_in_sq:.3e}"
        )));
    }
    let omega_kappa = omega_kappa_sq.max(0.0).sqrt();
    let numerator =
        omega_in_sq.sqrt() - model.delta_omega_col() * omega_kappa / model.omega_ax_in;
    Ok(-std::f64::consts::TAU * numerator / model.omega_col)
}

/// Exponents for every mode of a spectrum, largest (least suppressed) first.
/// The highest-frequency mode of a chain dominates.
pub fn higher_mode_ranking(
    spectrum: &ModeSpectrum,
    omega_rad: f64,
    model: &CollisionModel,
) -> Result<Vec<(usize, f64)>> {
    let mut ranked: Vec<(usize, f64)> = spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(kappa, &w2)| higher_mode_exponent(w2.max(0.0), omega_rad, model).map(|e| (kappa, e)))
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    Ok(ranked)
}
