//! Adaptive Dormand-Prince 5(4) integration with cubic Hermite dense output.
//!
//! The solver records every accepted step together with its derivative, so the
//! solution can be interpolated anywhere in the window without re-integration.

use crate::error::{Error, Result};

/// Tolerances and limits for one integration.
#[derive(Debug, Clone)]
pub struct OdeOptions {
    /// Relative tolerance per step.
    pub rtol: f64,
    /// Absolute tolerance per step (in the solver's state units).
    pub atol: f64,
    /// Hard cap on the step size; `None` leaves it to the controller.
    pub h_max: Option<f64>,
    /// Abort after this many accepted + rejected steps.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, h_max: None, max_steps: 20_000_000 }
    }
}

/// Accepted steps of one integration: times, states and state derivatives.
#[derive(Debug, Clone)]
pub struct DenseOutput<const N: usize> {
    ts: Vec<f64>,
    ys: Vec<[f64; N]>,
    dys: Vec<[f64; N]>,
}

impl<const N: usize> DenseOutput<N> {
    /// Assemble dense output from matching node arrays.
    pub fn from_parts(ts: Vec<f64>, ys: Vec<[f64; N]>, dys: Vec<[f64; N]>) -> Self {
        assert!(ts.len() >= 2 && ts.len() == ys.len() && ts.len() == dys.len());
        DenseOutput { ts, ys, dys }
    }

    pub fn times(&self) -> &[f64] {
        &self.ts
    }

    pub fn states(&self) -> &[[f64; N]] {
        &self.ys
    }

    pub fn derivatives(&self) -> &[[f64; N]] {
        &self.dys
    }

    pub fn t_start(&self) -> f64 {
        self.ts[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    fn locate(&self, t: f64) -> usize {
        // index of the interval [ts[i], ts[i+1]] containing t, clamped
        match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.ts.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.ts.len() - 2),
        }
    }

    /// Cubic Hermite interpolation of the state at `t` (clamped to the window).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let i = self.locate(t);
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let s = ((t - t0) / h).clamp(0.0, 1.0);
        let (h00, h10, h01, h11) = hermite_basis(s);
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = h00 * self.ys[i][k]
                + h10 * h * self.dys[i][k]
                + h01 * self.ys[i + 1][k]
                + h11 * h * self.dys[i + 1][k];
        }
        out
    }

    /// Time derivative of the Hermite interpolant at `t`.
    pub fn eval_derivative(&self, t: f64) -> [f64; N] {
        let i = self.locate(t);
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let s = ((t - t0) / h).clamp(0.0, 1.0);
        let (d00, d10, d01, d11) = hermite_basis_derivative(s);
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = (d00 * self.ys[i][k]
                + d10 * h * self.dys[i][k]
                + d01 * self.ys[i + 1][k]
                + d11 * h * self.dys[i + 1][k])
                / h;
        }
        out
    }

    /// Rescale the independent variable: t -> t/omega + shift, derivatives accordingly.
    /// Used to convert dimensionless solver time back to seconds.
    pub fn rescale_time(mut self, omega: f64, shift: f64) -> Self {
        for t in self.ts.iter_mut() {
            *t = *t / omega + shift;
        }
        for d in self.dys.iter_mut() {
            for v in d.iter_mut() {
                *v *= omega;
            }
        }
        self
    }
}

#[inline]
fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

#[inline]
fn hermite_basis_derivative(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    (
        6.0 * s2 - 6.0 * s,
        3.0 * s2 - 4.0 * s + 1.0,
        -6.0 * s2 + 6.0 * s,
        3.0 * s2 - 2.0 * s,
    )
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Outcome of a forward integration over `[t0, t1]`.
pub struct Integration<const N: usize> {
    pub dense: DenseOutput<N>,
    /// Time of the accepted step at which the halt predicate first fired.
    pub halted_at: Option<f64>,
}

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t1` (forward, t1 > t0).
///
/// `halt` is evaluated on every accepted state; returning true stops the
/// integration early with `halted_at` set.
pub fn integrate<const N: usize>(
    mut rhs: impl FnMut(f64, &[f64; N]) -> [f64; N],
    span: (f64, f64),
    y0: [f64; N],
    opts: &OdeOptions,
    mut halt: impl FnMut(f64, &[f64; N]) -> bool,
) -> Result<Integration<N>> {
    let (t0, t1) = span;
    if !(t1 > t0) {
        return Err(Error::InvalidInput {
            what: "integration window",
            why: format!("t_out = {t1} must exceed t_in = {t0}"),
        });
    }

    let mut t = t0;
    let mut y = y0;
    let mut f = rhs(t, &y);

    let h_cap = opts.h_max.unwrap_or(f64::INFINITY).min(t1 - t0);
    let mut h = initial_step(&mut rhs, t, &y, &f, t1, opts).min(h_cap);

    let mut ts = vec![t];
    let mut ys = vec![y];
    let mut dys = vec![f];
    let mut halted_at = None;

    if halt(t, &y) {
        halted_at = Some(t);
    }

    let mut k = [[0.0; N]; 7];
    let mut steps = 0usize;

    while halted_at.is_none() && t < t1 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::MaxStepsExceeded { t, max_steps: opts.max_steps });
        }
        if h < 1e-14 * (t.abs() + 1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        if t + h > t1 {
            h = t1 - t;
        }

        k[0] = f;
        for stage in 1..7 {
            let mut ys_stage = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a == 0.0 {
                    continue;
                }
                for idx in 0..N {
                    ys_stage[idx] += h * a * kj[idx];
                }
            }
            k[stage] = rhs(t + C[stage] * h, &ys_stage);
        }

        let mut y5 = y;
        let mut y4 = y;
        for (j, kj) in k.iter().enumerate() {
            for idx in 0..N {
                y5[idx] += h * B5[j] * kj[idx];
                y4[idx] += h * B4[j] * kj[idx];
            }
        }

        let mut err_norm: f64 = 0.0;
        for idx in 0..N {
            let tol = opts.atol + opts.rtol * y[idx].abs().max(y5[idx].abs());
            err_norm = err_norm.max(((y5[idx] - y4[idx]) / tol).abs());
        }

        if err_norm.is_finite() && err_norm <= 1.0 {
            t += h;
            y = y5;
            f = k[6]; // FSAL: last stage is f(t + h, y5)
            ts.push(t);
            ys.push(y);
            dys.push(f);
            if halt(t, &y) {
                halted_at = Some(t);
            }
        }

        let scale = if err_norm.is_finite() && err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else if err_norm == 0.0 {
            5.0
        } else {
            0.2
        };
        h = (h * scale).min(h_cap);
    }

    Ok(Integration { dense: DenseOutput { ts, ys, dys }, halted_at })
}

/// Hairer-style automatic initial step selection.
fn initial_step<const N: usize>(
    rhs: &mut impl FnMut(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    t1: f64,
    opts: &OdeOptions,
) -> f64 {
    let span = t1 - t0;
    let sc: Vec<f64> = y0.iter().map(|y| opts.atol + opts.rtol * y.abs()).collect();
    let d0 = rms(y0, &sc);
    let d1 = rms(f0, &sc);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);

    let mut y1 = *y0;
    for i in 0..N {
        y1[i] += h0 * f0[i];
    }
    let f1 = rhs(t0 + h0, &y1);
    let mut df = [0.0; N];
    for i in 0..N {
        df[i] = f1[i] - f0[i];
    }
    let d2 = rms(&df, &sc) / h0;

    let d_max = d1.max(d2);
    let h1 = if d_max <= 1e-15 {
        (h0 * 1e-3).max(1e-6 * span)
    } else {
        (0.01 / d_max).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

fn rms<const N: usize>(v: &[f64; N], scale: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..N {
        let r = v[i] / scale[i];
        sum += r * r;
    }
    (sum / N as f64).sqrt()
}
