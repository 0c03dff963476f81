//! The scale function b(t): parametric collision/expansion models, forward
//! integration of the scale equation for a given axial waveform, and the
//! inverse construction of the waveform from a given scale function.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ode::{integrate, DenseOutput, OdeOptions};
use crate::trap::EquilibriumChain;

/// Scale value with its first two time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalePoint {
    pub b: f64,
    pub b_dot: f64,
    pub b_ddot: f64,
}

/// A scale function b(t) with derivatives available at any time.
pub trait ScaleFunction: Send + Sync {
    fn scale_at(&self, t: f64) -> ScalePoint;
}

impl<S: ScaleFunction + ?Sized> ScaleFunction for &S {
    fn scale_at(&self, t: f64) -> ScalePoint {
        (**self).scale_at(t)
    }
}

impl ScaleFunction for Arc<dyn ScaleFunction> {
    fn scale_at(&self, t: f64) -> ScalePoint {
        (**self).scale_at(t)
    }
}

/// Collision of the ions: b dips from 1 to its minimum at t = 0 and returns.
///
/// `delta_omega_col_sq` is the depth of the rocking-frequency change (rad^2/s^2),
/// `omega_col` the inverse collision time scale (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionModel {
    pub delta_omega_col_sq: f64,
    pub omega_col: f64,
    pub omega_ax_in: f64,
}

impl CollisionModel {
    pub fn new(delta_omega_col_sq: f64, omega_col: f64, omega_ax_in: f64) -> Result<Self> {
        if !(delta_omega_col_sq > 0.0) || !(omega_col > 0.0) || !(omega_ax_in > 0.0) {
            return Err(Error::InvalidInput {
                what: "collision model",
                why: format!(
                    "all parameters must be positive, got delta_omega_col_sq = {delta_omega_col_sq}, \
                     omega_col = {omega_col}, omega_ax_in = {omega_ax_in}"
                ),
            });
        }
        Ok(CollisionModel { delta_omega_col_sq, omega_col, omega_ax_in })
    }

    pub fn delta_omega_col(&self) -> f64 {
        self.delta_omega_col_sq.sqrt()
    }

    /// Minimum of the scale function, reached at t = 0.
    pub fn b_min(&self) -> f64 {
        let a = self.delta_omega_col_sq / (self.omega_ax_in * self.omega_ax_in);
        (1.0 + a).powf(-1.0 / 3.0)
    }

    /// Time beyond which |b - 1| < 1e-12 (the sech^2 tail has died off).
    pub fn settle_time(&self) -> f64 {
        15.0 / self.omega_col
    }
}

impl ScaleFunction for CollisionModel {
    fn scale_at(&self, t: f64) -> ScalePoint {
        let a = self.delta_omega_col_sq / (self.omega_ax_in * self.omega_ax_in);
        let w = self.omega_col;
        let s = w * t;
        let sech = sech(s);
        let tanh = s.tanh();
        let sech2 = sech * sech;
        let u = 1.0 + a * sech2;
        let u_dot = -2.0 * a * w * sech2 * tanh;
        let u_ddot = -2.0 * a * w * w * sech2 * (sech2 - 2.0 * tanh * tanh);
        powlaw_third(u, u_dot, u_ddot)
    }
}

/// Expansion (or contraction) of the ion separation: b moves from 1 to its
/// asymptotic value as tanh(omega_ex t) switches.
///
/// `delta_omega_ex_sq` is the induced jump of the squared rocking frequency;
/// negative values describe a frequency decrease (separation contraction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionModel {
    pub delta_omega_ex_sq: f64,
    pub omega_ex: f64,
    pub omega_ax_in: f64,
}

impl ExpansionModel {
    pub fn new(delta_omega_ex_sq: f64, omega_ex: f64, omega_ax_in: f64) -> Result<Self> {
        if !(omega_ex > 0.0) || !(omega_ax_in > 0.0) {
            return Err(Error::InvalidInput {
                what: "expansion model",
                why: "omega_ex and omega_ax_in must be positive".into(),
            });
        }
        if delta_omega_ex_sq >= omega_ax_in * omega_ax_in {
            return Err(Error::InvalidInput {
                what: "expansion model",
                why: "delta_omega_ex_sq must stay below omega_ax_in^2 or b(t) diverges".into(),
            });
        }
        Ok(ExpansionModel { delta_omega_ex_sq, omega_ex, omega_ax_in })
    }

    /// Asymptotic scale b(+infinity).
    pub fn b_final(&self) -> f64 {
        let r = self.delta_omega_ex_sq / (self.omega_ax_in * self.omega_ax_in);
        (1.0 - r).powf(-1.0 / 3.0)
    }

    pub fn settle_time(&self) -> f64 {
        15.0 / self.omega_ex
    }
}

impl ScaleFunction for ExpansionModel {
    fn scale_at(&self, t: f64) -> ScalePoint {
        let c = self.delta_omega_ex_sq / (2.0 * self.omega_ax_in * self.omega_ax_in);
        let w = self.omega_ex;
        let s = w * t;
        let sech = sech(s);
        let sech2 = sech * sech;
        let tanh = s.tanh();
        let u = 1.0 - c * (tanh + 1.0);
        let u_dot = -c * w * sech2;
        let u_ddot = 2.0 * c * w * w * sech2 * tanh;
        powlaw_third(u, u_dot, u_ddot)
    }
}

#[inline]
fn sech(s: f64) -> f64 {
    let c = s.cosh();
    if c.is_infinite() {
        0.0
    } else {
        1.0 / c
    }
}

/// b = u^(-1/3) with chain-rule derivatives.
#[inline]
fn powlaw_third(u: f64, u_dot: f64, u_ddot: f64) -> ScalePoint {
    let b = u.powf(-1.0 / 3.0);
    let um43 = u.powf(-4.0 / 3.0);
    let um73 = u.powf(-7.0 / 3.0);
    ScalePoint {
        b,
        b_dot: -um43 * u_dot / 3.0,
        b_ddot: 4.0 / 9.0 * um73 * u_dot * u_dot - um43 * u_ddot / 3.0,
    }
}

/// Time-dependent axial confinement, exposed as omega_ax^2(t).
#[derive(Debug, Clone)]
pub enum AxialWaveform {
    /// Fixed confinement.
    Constant { omega_ax_sq: f64 },
    /// Cosine-smoothed ramp to a plateau and back.
    Pulse(PulseWaveform),
    /// Sampled waveform with monotone cubic interpolation.
    Tabulated(TabulatedWaveform),
    /// Waveform derived from a prescribed scale function.
    FromScale(ScaleWaveform),
}

/// Ramp base^2 -> peak^2 through (1 - cos(pi s))/2, flat plateau, mirrored
/// return ramp. C1 in omega^2.
#[derive(Debug, Clone, Copy)]
pub struct PulseWaveform {
    pub base_sq: f64,
    pub peak_sq: f64,
    pub ramp: f64,
    pub hold: f64,
    pub t_start: f64,
}

impl PulseWaveform {
    pub fn t_end(&self) -> f64 {
        self.t_start + 2.0 * self.ramp + self.hold
    }

    fn eval_sq(&self, t: f64) -> f64 {
        let dt = t - self.t_start;
        if dt <= 0.0 {
            return self.base_sq;
        }
        if dt < self.ramp {
            let s = dt / self.ramp;
            return self.base_sq + (self.peak_sq - self.base_sq) * 0.5 * (1.0 - (std::f64::consts::PI * s).cos());
        }
        let dt = dt - self.ramp;
        if dt < self.hold {
            return self.peak_sq;
        }
        let dt = dt - self.hold;
        if dt < self.ramp {
            let s = 1.0 - dt / self.ramp;
            return self.base_sq + (self.peak_sq - self.base_sq) * 0.5 * (1.0 - (std::f64::consts::PI * s).cos());
        }
        self.base_sq
    }
}

/// Strictly increasing samples of omega_ax^2(t) with Fritsch-Carlson monotone
/// cubic slopes. Constant extrapolation outside the sampled range.
#[derive(Debug, Clone)]
pub struct TabulatedWaveform {
    ts: Vec<f64>,
    omega_sq: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedWaveform {
    pub fn times(&self) -> &[f64] {
        &self.ts
    }

    fn eval_sq(&self, t: f64) -> f64 {
        let ts = &self.ts;
        if t <= ts[0] {
            return self.omega_sq[0];
        }
        if t >= *ts.last().unwrap() {
            return *self.omega_sq.last().unwrap();
        }
        let i = match ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(ts.len() - 2),
            Err(i) => i - 1,
        };
        let h = ts[i + 1] - ts[i];
        let s = (t - ts[i]) / h;
        let (h00, h10, h01, h11) = {
            let s2 = s * s;
            let s3 = s2 * s;
            (
                2.0 * s3 - 3.0 * s2 + 1.0,
                s3 - 2.0 * s2 + s,
                -2.0 * s3 + 3.0 * s2,
                s3 - s2,
            )
        };
        h00 * self.omega_sq[i]
            + h10 * h * self.slopes[i]
            + h01 * self.omega_sq[i + 1]
            + h11 * h * self.slopes[i + 1]
    }
}

/// Fritsch-Carlson slopes, monotonicity-preserving.
fn pchip_slopes(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = ts.len();
    if n == 2 {
        let d = (ys[1] - ys[0]) / (ts[1] - ts[0]);
        return vec![d, d];
    }
    let h: Vec<f64> = ts.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    m[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// omega_ax^2(t) computed from a scale function through the scale equation:
/// omega^2 = omega_ax_in^2 / b^3 - b_ddot / b.
#[derive(Clone)]
pub struct ScaleWaveform {
    scale: Arc<dyn ScaleFunction>,
    omega_ax_in_sq: f64,
    repulsive: Vec<(f64, f64)>,
}

impl std::fmt::Debug for ScaleWaveform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScaleWaveform")
            .field("omega_ax_in_sq", &self.omega_ax_in_sq)
            .field("repulsive", &self.repulsive)
            .finish_non_exhaustive()
    }
}

impl ScaleWaveform {
    fn eval_sq(&self, t: f64) -> f64 {
        let p = self.scale.scale_at(t);
        self.omega_ax_in_sq / (p.b * p.b * p.b) - p.b_ddot / p.b
    }
}

impl AxialWaveform {
    pub fn constant(omega_ax: f64) -> Result<Self> {
        if !(omega_ax > 0.0) {
            return Err(Error::InvalidInput {
                what: "constant waveform",
                why: "omega_ax must be positive".into(),
            });
        }
        Ok(AxialWaveform::Constant { omega_ax_sq: omega_ax * omega_ax })
    }

    /// Canonical pulse: base frequency, peak frequency, ramp and hold durations,
    /// with the up-ramp starting at `t_start`.
    pub fn pulse(omega_ax_in: f64, omega_ax_peak: f64, ramp: f64, hold: f64, t_start: f64) -> Result<Self> {
        if !(omega_ax_in > 0.0) || !(omega_ax_peak > 0.0) || !(ramp > 0.0) || !(hold >= 0.0) {
            return Err(Error::InvalidInput {
                what: "pulse waveform",
                why: "frequencies and ramp must be positive, hold non-negative".into(),
            });
        }
        Ok(AxialWaveform::Pulse(PulseWaveform {
            base_sq: omega_ax_in * omega_ax_in,
            peak_sq: omega_ax_peak * omega_ax_peak,
            ramp,
            hold,
            t_start,
        }))
    }

    /// Sampled waveform; `omega_ax` values are angular frequencies (rad/s).
    pub fn tabulated(ts: Vec<f64>, omega_ax: Vec<f64>) -> Result<Self> {
        if ts.len() != omega_ax.len() || ts.len() < 2 {
            return Err(Error::InvalidInput {
                what: "tabulated waveform",
                why: "need at least two samples with matching lengths".into(),
            });
        }
        if !ts.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput {
                what: "tabulated waveform",
                why: "sample times must be strictly increasing".into(),
            });
        }
        let omega_sq: Vec<f64> = omega_ax.iter().map(|w| w * w).collect();
        let slopes = pchip_slopes(&ts, &omega_sq);
        Ok(AxialWaveform::Tabulated(TabulatedWaveform { ts, omega_sq, slopes }))
    }

    /// Parse the two-column CSV schema `time_s,omega_ax_over_2pi_Hz`.
    /// The header must carry exactly these column names.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::InvalidInput {
            what: "waveform CSV",
            why: "file is empty".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["time_s", "omega_ax_over_2pi_Hz"] {
            return Err(Error::InvalidInput {
                what: "waveform CSV",
                why: format!(
                    "header must be exactly 'time_s,omega_ax_over_2pi_Hz', got '{}'",
                    header.trim()
                ),
            });
        }
        let mut ts = Vec::new();
        let mut omega = Vec::new();
        for (lineno, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(Error::InvalidInput {
                    what: "waveform CSV",
                    why: format!("line {}: expected 2 fields, got {}", lineno + 1, fields.len()),
                });
            }
            let t: f64 = fields[0].parse().map_err(|_| Error::InvalidInput {
                what: "waveform CSV",
                why: format!("line {}: bad time value '{}'", lineno + 1, fields[0]),
            })?;
            let f: f64 = fields[1].parse().map_err(|_| Error::InvalidInput {
                what: "waveform CSV",
                why: format!("line {}: bad frequency value '{}'", lineno + 1, fields[1]),
            })?;
            ts.push(t);
            omega.push(std::f64::consts::TAU * f);
        }
        AxialWaveform::tabulated(ts, omega)
    }

    /// Squared axial frequency at time t. May be negative for waveforms
    /// derived from scale functions that require repulsive confinement.
    pub fn omega_ax_sq(&self, t: f64) -> f64 {
        match self {
            AxialWaveform::Constant { omega_ax_sq } => *omega_ax_sq,
            AxialWaveform::Pulse(p) => p.eval_sq(t),
            AxialWaveform::Tabulated(w) => w.eval_sq(t),
            AxialWaveform::FromScale(s) => s.eval_sq(t),
        }
    }

    /// Axial frequency where real; the square root of the clamped radicand.
    pub fn omega_ax(&self, t: f64) -> f64 {
        self.omega_ax_sq(t).max(0.0).sqrt()
    }

    /// Intervals flagged at construction where omega_ax^2 < 0 (repulsive
    /// trapping potential). Empty for all waveform kinds except `FromScale`.
    pub fn repulsive_intervals(&self) -> &[(f64, f64)] {
        match self {
            AxialWaveform::FromScale(s) => &s.repulsive,
            _ => &[],
        }
    }
}

/// Build the axial waveform that generates a prescribed scale function.
///
/// Negative radicands are annotated rather than rejected: the interval list of
/// the returned waveform marks where the required trapping potential is
/// repulsive. The scan uses `scan_points` samples over `window` with bisection
/// refinement of each sign change.
pub fn axial_frequency_from_scale(
    scale: Arc<dyn ScaleFunction>,
    omega_ax_in: f64,
    window: (f64, f64),
    scan_points: usize,
) -> Result<AxialWaveform> {
    if !(omega_ax_in > 0.0) {
        return Err(Error::InvalidInput {
            what: "scale-derived waveform",
            why: "omega_ax_in must be positive".into(),
        });
    }
    let (t0, t1) = window;
    if !(t1 > t0) || scan_points < 2 {
        return Err(Error::InvalidInput {
            what: "scale-derived waveform",
            why: "window must be ordered and scan_points at least 2".into(),
        });
    }
    let wf = ScaleWaveform {
        scale,
        omega_ax_in_sq: omega_ax_in * omega_ax_in,
        repulsive: Vec::new(),
    };

    // locate repulsive intervals on the scan grid
    let eval = |t: f64| -> Result<f64> {
        let p = wf.scale.scale_at(t);
        if !(p.b > 0.0) {
            return Err(Error::InvalidInput {
                what: "scale-derived waveform",
                why: format!("scale function is not positive at t = {t:.6e}"),
            });
        }
        Ok(wf.omega_ax_in_sq / (p.b * p.b * p.b) - p.b_ddot / p.b)
    };

    let h = (t1 - t0) / (scan_points - 1) as f64;
    let mut repulsive = Vec::new();
    let mut prev_t = t0;
    let mut prev_v = eval(t0)?;
    let mut open: Option<f64> = if prev_v < 0.0 { Some(t0) } else { None };
    for i in 1..scan_points {
        let t = t0 + i as f64 * h;
        let v = eval(t)?;
        if (v < 0.0) != (prev_v < 0.0) {
            let crossing = bisect_sign_change(&eval, prev_t, t, prev_v < 0.0)?;
            match open.take() {
                Some(start) => repulsive.push((start, crossing)),
                None => open = Some(crossing),
            }
        }
        prev_t = t;
        prev_v = v;
    }
    if let Some(start) = open {
        repulsive.push((start, t1));
    }

    Ok(AxialWaveform::FromScale(ScaleWaveform { repulsive, ..wf }))
}

fn bisect_sign_change(
    eval: &impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    lo_negative: bool,
) -> Result<f64> {
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if (eval(mid)? < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Options for the scale-equation solve.
#[derive(Debug, Clone)]
pub struct ScaleOdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Acceptance threshold for the dimensionless residual self-check. The
    /// check differentiates the dense-output interpolant, which is one order
    /// less accurate than the solution itself, so the default sits well above
    /// the integration tolerance.
    pub residual_tol: f64,
}

impl Default for ScaleOdeOptions {
    fn default() -> Self {
        ScaleOdeOptions { rtol: 1e-10, atol: 1e-12, residual_tol: 1e-4 }
    }
}

/// Scale below which the chain is treated as collapsed.
const COLLAPSE_FLOOR: f64 = 1e-4;

/// Solved scale trajectory on the window it was integrated over.
#[derive(Debug, Clone)]
pub struct ScaleTrajectory {
    dense: DenseOutput<2>,
    waveform: AxialWaveform,
    omega_ax_in: f64,
}

impl ScaleTrajectory {
    pub fn t_in(&self) -> f64 {
        self.dense.t_start()
    }

    pub fn t_out(&self) -> f64 {
        self.dense.t_end()
    }

    /// Accepted solver steps (s).
    pub fn grid(&self) -> &[f64] {
        self.dense.times()
    }

    pub fn omega_ax_in(&self) -> f64 {
        self.omega_ax_in
    }

    pub fn waveform(&self) -> &AxialWaveform {
        &self.waveform
    }

    /// Scale and derivatives at `t`. The second derivative is reconstructed
    /// from the scale equation, which is exact given b and the waveform.
    pub fn eval(&self, t: f64) -> ScalePoint {
        let [b, b_dot] = self.dense.eval(t);
        let w2 = self.waveform.omega_ax_sq(t);
        let win2 = self.omega_ax_in * self.omega_ax_in;
        ScalePoint { b, b_dot, b_ddot: win2 / (b * b) - w2 * b }
    }

    /// Dimensionless residual of the scale equation at `t`, using the
    /// interpolant's own second derivative (independent of the reconstruction
    /// used by `eval`). Normalized by the dominant term of the equation so
    /// the check is insensitive to how hard the chain is driven.
    pub fn residual(&self, t: f64) -> f64 {
        let [b, _b_dot] = self.dense.eval(t);
        let b_ddot = self.dense.eval_derivative(t)[1];
        let w2 = self.waveform.omega_ax_sq(t);
        let win2 = self.omega_ax_in * self.omega_ax_in;
        let scale = (win2 * b.max(1.0)).max((w2 * b).abs()).max(win2 / (b * b));
        (b_ddot + w2 * b - win2 / (b * b)).abs() / scale
    }

    /// Largest residual on a grid `refine` times denser than the solver steps.
    pub fn max_residual(&self, refine: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for w in self.dense.times().windows(2) {
            for j in 0..refine {
                let t = w[0] + (w[1] - w[0]) * (j as f64 + 0.5) / refine as f64;
                worst = worst.max(self.residual(t));
            }
        }
        worst
    }

    /// Global minimum of b over the window: (time, value). Node scan followed
    /// by golden-section refinement of the bracketing interval.
    pub fn minimum(&self) -> (f64, f64) {
        let ts = self.dense.times();
        let states = self.dense.states();
        let mut k = 0;
        for (i, y) in states.iter().enumerate() {
            if y[0] < states[k][0] {
                k = i;
            }
        }
        let lo = ts[k.saturating_sub(1)];
        let hi = ts[(k + 1).min(ts.len() - 1)];
        let (mut a, mut b) = (lo, hi);
        let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
        let f = |t: f64| self.dense.eval(t)[0];
        for _ in 0..120 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let t_min = 0.5 * (a + b);
        (t_min, f(t_min))
    }

    /// First zero of b_dot after `t_after` (a turning point of the classical
    /// motion), refined by bisection. None if b_dot does not change sign.
    pub fn next_turning_point(&self, t_after: f64) -> Option<f64> {
        let ts = self.dense.times();
        let n = 2048.max(ts.len());
        let (t0, t1) = (t_after.max(self.t_in()), self.t_out());
        if !(t1 > t0) {
            return None;
        }
        let f = |t: f64| self.dense.eval(t)[1];
        let h = (t1 - t0) / n as f64;
        let mut prev = f(t0);
        for i in 1..=n {
            let t = t0 + i as f64 * h;
            let v = f(t);
            if prev == 0.0 {
                return Some(t - h);
            }
            if prev.signum() != v.signum() {
                let (mut lo, mut hi) = (t - h, t);
                let lo_neg = prev < 0.0;
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if (f(mid) < 0.0) == lo_neg {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
            prev = v;
        }
        None
    }
}

impl ScaleFunction for ScaleTrajectory {
    fn scale_at(&self, t: f64) -> ScalePoint {
        self.eval(t)
    }
}

/// Integrate the scale equation b'' + omega_ax^2(t) b = omega_ax_in^2 / b^2
/// over `window` with b(t_in) = 1, b'(t_in) = 0.
pub fn solve_scale_ode(
    waveform: &AxialWaveform,
    omega_ax_in: f64,
    window: (f64, f64),
    opts: &ScaleOdeOptions,
) -> Result<ScaleTrajectory> {
    if !(omega_ax_in > 0.0) {
        return Err(Error::InvalidInput {
            what: "scale equation",
            why: "omega_ax_in must be positive".into(),
        });
    }
    let (t_in, t_out) = window;
    if !(t_out > t_in) || !t_in.is_finite() || !t_out.is_finite() {
        return Err(Error::InvalidInput {
            what: "scale equation",
            why: format!("window [{t_in}, {t_out}] must be finite and ordered"),
        });
    }
    let win2 = omega_ax_in * omega_ax_in;
    let w0 = waveform.omega_ax_sq(t_in);
    if (w0 - win2).abs() > 1e-6 * win2 {
        return Err(Error::InvalidInput {
            what: "scale equation",
            why: format!(
                "waveform must equal omega_ax_in at t_in: omega^2(t_in) = {w0:.6e}, omega_ax_in^2 = {win2:.6e}"
            ),
        });
    }

    // dimensionless time tau = omega_ax_in * t
    let tau_span = (omega_ax_in * t_in, omega_ax_in * t_out);
    let rhs = |tau: f64, y: &[f64; 2]| -> [f64; 2] {
        let b = y[0];
        let w2 = waveform.omega_ax_sq(tau / omega_ax_in);
        [y[1], 1.0 / (b * b) - (w2 / win2) * b]
    };
    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        // never step blindly across waveform features
        h_max: Some((tau_span.1 - tau_span.0) / 64.0),
        ..OdeOptions::default()
    };
    let run = integrate(rhs, tau_span, [1.0, 0.0], &ode_opts, |_, y| y[0] <= COLLAPSE_FLOOR)
        .map_err(|e| rescale_ode_error(e, omega_ax_in))?;

    if run.halted_at.is_some() {
        // refine the crossing time on the interpolant
        let dense = &run.dense;
        let f = |tau: f64| dense.eval(tau)[0] - COLLAPSE_FLOOR;
        let ts = dense.times();
        let mut lo = ts[0];
        let mut hi = *ts.last().unwrap();
        for w in ts.windows(2) {
            if f(w[1]) <= 0.0 {
                lo = w[0];
                hi = w[1];
                break;
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Err(Error::ChainCollapse {
            t: 0.5 * (lo + hi) / omega_ax_in,
            floor: COLLAPSE_FLOOR,
        });
    }

    // convert nodes from (b, db/dtau) to SI (b, db/dt)
    let dense = run.dense.rescale_time(omega_ax_in, 0.0);
    let ts = dense.times().to_vec();
    let ys: Vec<[f64; 2]> = dense.states().iter().map(|y| [y[0], y[1] * omega_ax_in]).collect();
    let dys: Vec<[f64; 2]> =
        dense.derivatives().iter().map(|d| [d[0], d[1] * omega_ax_in]).collect();
    let trajectory = ScaleTrajectory {
        dense: DenseOutput::from_parts(ts, ys, dys),
        waveform: waveform.clone(),
        omega_ax_in,
    };

    let max_residual = trajectory.max_residual(10);
    if max_residual > opts.residual_tol {
        return Err(Error::ResidualTooLarge { max_residual, tolerance: opts.residual_tol });
    }
    Ok(trajectory)
}

fn rescale_ode_error(e: Error, omega: f64) -> Error {
    match e {
        Error::StepSizeUnderflow { t, h } => Error::StepSizeUnderflow { t: t / omega, h: h / omega },
        Error::MaxStepsExceeded { t, max_steps } => {
            Error::MaxStepsExceeded { t: t / omega, max_steps }
        }
        other => other,
    }
}

/// Time-dependent squared mode frequency: omega_rad^2 - omega_kappa^2 / b^3.
/// Negative values signal radial instability and are returned as-is.
pub fn mode_frequency_sq(omega_kappa_sq: f64, omega_rad: f64, b: f64) -> f64 {
    omega_rad * omega_rad - omega_kappa_sq / (b * b * b)
}

/// Classical ion separation for the two-ion chain at scale b.
pub fn ion_separation(chain: &EquilibriumChain, b: f64) -> Result<f64> {
    Ok(b * chain.separation()?)
}
