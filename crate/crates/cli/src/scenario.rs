//! Scenario orchestration: equilibrium, scale dynamics, per-mode Bogoliubov
//! extraction, approximations, and the entanglement analysis.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use ionpair::bogoliubov::collision_beta_sq_for_mode;
use ionpair::*;

use crate::config::{set_numeric_key, AnalysisFlags, DriveSpec, Scenario};

/// Number of rows in the emitted time series.
const SERIES_POINTS: usize = 1201;

#[derive(Debug, Clone)]
pub struct TimeSeries {
    /// Sample times (s).
    pub t: Vec<f64>,
    /// Squared axial confinement (rad^2/s^2); may be negative for
    /// scale-derived waveforms.
    pub omega_ax_sq: Vec<f64>,
    /// Scale function.
    pub b: Vec<f64>,
    /// Ion separation (m); empty unless the chain has two ions.
    pub delta_x: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ModeOutcome {
    pub kappa: usize,
    pub omega_kappa_sq: f64,
    pub omega_in: f64,
    pub omega_out: f64,
    pub coeffs: bogoliubov::BogoliubovCoefficients,
    pub xi: SqueezingParameter,
    pub mean_phonons: f64,
}

#[derive(Debug, Clone)]
pub struct WkbOutcome {
    /// Exponent from the contour integral of the equivalent collision model.
    pub contour: Option<WkbEstimate>,
    /// Quadratic-minimum exponent from the measured profile minimum.
    pub taylor_exponent: f64,
    pub omega_min_sq: f64,
    pub curvature_sq: f64,
}

#[derive(Debug, Clone)]
pub struct EntanglementOutcome {
    pub n_plus: f64,
    pub n_minus: f64,
    pub xi_abs: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub entangled: bool,
    pub margin: f64,
    /// Entanglement of formation; None when the state is not symmetric.
    pub e_f: Option<f64>,
    pub first_order_entangled: bool,
    pub exact_entangled: bool,
}

/// Everything a scenario run produces. Deterministic for a given scenario.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub gamma: f64,
    pub positions: Vec<f64>,
    pub mode_eigenvalues: Vec<f64>,
    pub b_crit: f64,
    pub delta_x_eq: Option<f64>,
    pub window: (f64, f64),
    pub t_extract: f64,
    pub series: TimeSeries,
    pub b_min: f64,
    pub t_min: f64,
    pub modes: Vec<ModeOutcome>,
    pub p1p2: Option<std::result::Result<PairParameterEstimate, String>>,
    pub wkb: Option<std::result::Result<WkbOutcome, String>>,
    pub entanglement: Option<std::result::Result<EntanglementOutcome, String>>,
    pub repulsive_intervals: Vec<(f64, f64)>,
}

fn stage(err: Error, stage: &str) -> Error {
    err.in_stage(stage)
}

/// The drive realized as a scale source plus integration window.
struct RealizedDrive {
    scale: Arc<dyn ScaleFunction>,
    waveform: AxialWaveform,
    window: (f64, f64),
    /// Time at which Bogoliubov coefficients are extracted.
    t_extract: f64,
    /// Equivalent collision model when the drive is one.
    collision: Option<CollisionModel>,
}

/// Run one scenario end to end. `base_dir` anchors relative waveform paths.
pub fn run_scenario(scenario: &Scenario, base_dir: &Path) -> Result<ScenarioResult> {
    let species = IonSpecies::from_atomic_mass(scenario.mass_u, scenario.charge)?;
    let config = TrapConfig::new(species, scenario.n_ions, scenario.omega_rad, scenario.omega_ax)?;
    let chain = solve_equilibrium(&config).map_err(|e| stage(e, "equilibrium"))?;
    let matrix = coupling_matrix(&chain).map_err(|e| stage(e, "coupling matrix"))?;
    let spectrum = mode_spectrum(&matrix).map_err(|e| stage(e, "mode spectrum"))?;
    let b_crit = critical_scale(&config);
    let delta_x_eq = chain.separation().ok();

    let drive = realize_drive(scenario, &config, base_dir)?;

    // time series on a uniform grid
    let t0 = drive.window.0;
    let t1 = drive.t_extract;
    let mut series = TimeSeries {
        t: Vec::with_capacity(SERIES_POINTS),
        omega_ax_sq: Vec::with_capacity(SERIES_POINTS),
        b: Vec::with_capacity(SERIES_POINTS),
        delta_x: Vec::new(),
    };
    for i in 0..SERIES_POINTS {
        let t = t0 + (t1 - t0) * i as f64 / (SERIES_POINTS - 1) as f64;
        let b = drive.scale.scale_at(t).b;
        series.t.push(t);
        series.omega_ax_sq.push(drive.waveform.omega_ax_sq(t));
        series.b.push(b);
        if let Some(dx) = delta_x_eq {
            series.delta_x.push(b * dx);
        }
    }

    let (t_min, b_min) = scale_minimum(drive.scale.as_ref(), (t0, t1));

    // per-mode Bogoliubov coefficients
    let mut modes = Vec::new();
    if scenario.analysis.bogoliubov {
        for (kappa, &omega_kappa_sq) in spectrum.eigenvalues.iter().enumerate() {
            let profile = ModeProfile {
                scale: Arc::clone(&drive.scale),
                omega_rad: config.omega_rad,
                omega_kappa_sq: omega_kappa_sq.max(0.0),
            };
            let solution =
                integrate_mode(&profile, (drive.window.0, drive.t_extract), &ModeOptions::default())
                    .map_err(|e| stage(e, "mode integration"))?;
            let mut coeffs =
                extract_bogoliubov(&solution).map_err(|e| stage(e, "Bogoliubov extraction"))?;
            coeffs.mode_index = Some(kappa);
            let xi = squeezing_from_bogoliubov(&coeffs);
            modes.push(ModeOutcome {
                kappa,
                omega_kappa_sq,
                omega_in: solution.omega_in(),
                omega_out: solution.omega_out(),
                mean_phonons: mean_phonons(&coeffs),
                coeffs,
                xi,
            });
        }
    }

    // collision-surrogate estimate from the realized geometry
    let p1p2 = if scenario.analysis.p1p2 {
        Some(
            match delta_x_eq.ok_or_else(|| {
                Error::RegimeViolation("p1p2 estimate requires a two-ion chain".into())
            }) {
                Ok(dx_eq) => p1p2_beta_sq(
                    dx_eq,
                    b_min * dx_eq,
                    drive.waveform.omega_ax(t_min),
                    config.omega_ax_in,
                    config.omega_rad,
                )
                .map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            },
        )
    } else {
        None
    };

    let wkb = if scenario.analysis.wkb {
        Some(compute_wkb(&drive, &config, &p1p2, (t0, t1), t_min))
    } else {
        None
    };

    let entanglement = if scenario.analysis.entanglement {
        Some(compute_entanglement(scenario, &modes))
    } else {
        None
    };

    Ok(ScenarioResult {
        gamma: chain.gamma(),
        positions: chain.positions().to_vec(),
        mode_eigenvalues: spectrum.eigenvalues.clone(),
        b_crit,
        delta_x_eq,
        window: drive.window,
        t_extract: drive.t_extract,
        series,
        b_min,
        t_min,
        modes,
        p1p2,
        wkb,
        entanglement,
        repulsive_intervals: drive.waveform.repulsive_intervals().to_vec(),
    })
}

fn realize_drive(scenario: &Scenario, config: &TrapConfig, base_dir: &Path) -> Result<RealizedDrive> {
    let w_ax = config.omega_ax_in;
    // slowest positive mode frequency sets the out-state sampling margin
    let omega_slow_sq = config.omega_rad * config.omega_rad
        - scenario.omega_ax * scenario.omega_ax * (config.n_ions as f64 - 1.0).max(1.0);
    let margin_omega = omega_slow_sq.max(0.25 * config.omega_rad * config.omega_rad).sqrt();

    match &scenario.drive {
        DriveSpec::Pulse { peak, ramp, hold } => {
            let waveform = AxialWaveform::pulse(w_ax, *peak, *ramp, *hold, 0.0)?;
            let pulse_end = 2.0 * ramp + hold;
            let t_osc = std::f64::consts::TAU / (3.0_f64.sqrt() * w_ax);
            let horizon = scenario.t_out.unwrap_or(pulse_end + 5.0 * t_osc);
            let trajectory =
                solve_scale_ode(&waveform, w_ax, (0.0, horizon), &scenario.ode)
                    .map_err(|e| stage(e, "scale equation"))?;
            // extract at a classical turning point, where the mode frequency
            // is instantaneously stationary
            let t_extract = trajectory
                .next_turning_point(pulse_end + t_osc)
                .unwrap_or(horizon);
            Ok(RealizedDrive {
                scale: Arc::new(trajectory),
                waveform,
                window: (0.0, horizon),
                t_extract,
                collision: None,
            })
        }
        DriveSpec::Collision { delta_omega, rate } => {
            let model = CollisionModel::new(delta_omega * delta_omega, *rate, w_ax)?;
            let settle = model.settle_time();
            let t_extract = scenario
                .t_out
                .unwrap_or(settle + 2.5 * std::f64::consts::TAU / margin_omega);
            let window = (-settle, t_extract);
            let waveform = axial_frequency_from_scale(Arc::new(model), w_ax, window, 4096)?;
            Ok(RealizedDrive {
                scale: Arc::new(model),
                waveform,
                window,
                t_extract,
                collision: Some(model),
            })
        }
        DriveSpec::Expansion { omega_ax_final, rate } => {
            let delta_sq = w_ax * w_ax - omega_ax_final * omega_ax_final;
            let model = ExpansionModel::new(delta_sq, *rate, w_ax)?;
            let settle = model.settle_time();
            let t_extract = scenario
                .t_out
                .unwrap_or(settle + 2.5 * std::f64::consts::TAU / margin_omega);
            let window = (-settle, t_extract);
            let waveform = axial_frequency_from_scale(Arc::new(model), w_ax, window, 4096)?;
            Ok(RealizedDrive {
                scale: Arc::new(model),
                waveform,
                window,
                t_extract,
                collision: None,
            })
        }
        DriveSpec::Tabulated { path } => {
            let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
            let text = std::fs::read_to_string(&full).map_err(|e| Error::InvalidInput {
                what: "tabulated waveform",
                why: format!("cannot read {}: {e}", full.display()),
            })?;
            let waveform = AxialWaveform::from_csv(&text)?;
            let (t0, t1) = match &waveform {
                AxialWaveform::Tabulated(w) => {
                    let sq = |t: f64| waveform.omega_ax_sq(t);
                    let _ = sq;
                    (w_first_time(w), w_last_time(w))
                }
                _ => unreachable!(),
            };
            let t1 = scenario.t_out.unwrap_or(t1);
            let trajectory = solve_scale_ode(&waveform, w_ax, (t0, t1), &scenario.ode)
                .map_err(|e| stage(e, "scale equation"))?;
            // prefer a turning point in the final quarter of the window
            let t_extract = trajectory
                .next_turning_point(t0 + 0.75 * (t1 - t0))
                .unwrap_or(t1);
            Ok(RealizedDrive {
                scale: Arc::new(trajectory),
                waveform,
                window: (t0, t1),
                t_extract,
                collision: None,
            })
        }
    }
}

fn w_first_time(w: &scale::TabulatedWaveform) -> f64 {
    w.times()[0]
}

fn w_last_time(w: &scale::TabulatedWaveform) -> f64 {
    *w.times().last().unwrap()
}

/// Minimum of b over the window for an arbitrary scale source: coarse scan
/// plus golden-section refinement.
fn scale_minimum(scale: &dyn ScaleFunction, window: (f64, f64)) -> (f64, f64) {
    let (t0, t1) = window;
    let n = 4096;
    let mut best = (t0, scale.scale_at(t0).b);
    for i in 1..=n {
        let t = t0 + (t1 - t0) * i as f64 / n as f64;
        let b = scale.scale_at(t).b;
        if b < best.1 {
            best = (t, b);
        }
    }
    let h = (t1 - t0) / n as f64;
    let (mut a, mut b) = ((best.0 - h).max(t0), (best.0 + h).min(t1));
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    for _ in 0..120 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if scale.scale_at(c).b < scale.scale_at(d).b {
            b = d;
        } else {
            a = c;
        }
    }
    let t_min = 0.5 * (a + b);
    (t_min, scale.scale_at(t_min).b)
}

fn compute_wkb(
    drive: &RealizedDrive,
    config: &TrapConfig,
    p1p2: &Option<std::result::Result<PairParameterEstimate, String>>,
    window: (f64, f64),
    t_min: f64,
) -> std::result::Result<WkbOutcome, String> {
    let omega_in_sq = config.omega_rad * config.omega_rad - config.omega_ax_in * config.omega_ax_in;
    let rocking = ModeProfile {
        scale: Arc::clone(&drive.scale),
        omega_rad: config.omega_rad,
        omega_kappa_sq: config.omega_ax_in * config.omega_ax_in,
    };

    // measured minimum and curvature of the realized rocking profile
    let h = (window.1 - window.0) / 2000.0;
    let f = |t: f64| bogoliubov::FrequencyProfile::omega_sq(&rocking, t);
    let omega_min_sq = f(t_min);
    let curvature_sq = (f(t_min + h) - 2.0 * omega_min_sq + f(t_min - h)) / (h * h);
    let taylor_exponent =
        taylor_wkb_exponent(omega_min_sq, curvature_sq).map_err(|e| e.to_string())?;

    // contour exponent through the model collision (exact for collision
    // drives, the p1/p2 surrogate otherwise)
    let model = drive
        .collision
        .or_else(|| p1p2.as_ref().and_then(|r| r.as_ref().ok().map(|e| e.model)));
    let contour = match model {
        Some(m) => {
            let profile = CollisionFrequencyProfile::new(&m, omega_in_sq.sqrt())
                .map_err(|e| e.to_string())?;
            Some(
                wkb_beta_exponent(&profile, (-m.settle_time(), m.settle_time()))
                    .map_err(|e| e.to_string())?,
            )
        }
        None => None,
    };

    Ok(WkbOutcome { contour, taylor_exponent, omega_min_sq, curvature_sq })
}

fn compute_entanglement(
    scenario: &Scenario,
    modes: &[ModeOutcome],
) -> std::result::Result<EntanglementOutcome, String> {
    if scenario.n_ions != 2 {
        return Err("entanglement analysis requires exactly two ions".into());
    }
    if modes.len() != 2 {
        return Err("entanglement analysis needs the Bogoliubov stage enabled".into());
    }
    let com = &modes[0];
    let rocking = &modes[1];

    let occ = if let Some(n_th) = scenario.thermal.n_th {
        ThermalOccupation::new(0.5 * n_th, 0.5 * n_th).map_err(|e| e.to_string())?
    } else if let Some(t) = scenario.thermal.temperature {
        ThermalOccupation::from_temperature(t, com.omega_in, rocking.omega_in)
            .map_err(|e| e.to_string())?
    } else {
        ThermalOccupation::new(0.0, 0.0).unwrap()
    };

    let alpha_plus = com.coeffs.alpha / com.coeffs.alpha.norm();
    let transform = squeeze_transform(&rocking.coeffs, alpha_plus).map_err(|e| e.to_string())?;
    let sigma_in = thermal_covariance(&occ);
    let sigma_out = evolve_covariance(&sigma_in, &transform);
    let sigma_ion = basis_change(&sigma_out);

    let pt = pt_symplectic_eigenvalues(&sigma_ion).map_err(|e| e.to_string())?;
    let verdict = is_entangled(&sigma_ion).map_err(|e| e.to_string())?;
    let e_f = if symmetric_squeezing(&sigma_ion).map_err(|e| e.to_string())? {
        Some(entanglement_of_formation(pt.minus).map_err(|e| e.to_string())?)
    } else {
        None
    };

    let n_th_total = occ.n_plus + occ.n_minus;
    let xi_abs = rocking.xi.magnitude();
    let perturbative = perturbative_state(n_th_total, Complex64::new(xi_abs, 0.0))
        .map_err(|e| e.to_string())?;

    Ok(EntanglementOutcome {
        n_plus: occ.n_plus,
        n_minus: occ.n_minus,
        xi_abs,
        lambda_plus: pt.plus,
        lambda_minus: pt.minus,
        entangled: verdict.entangled,
        margin: verdict.margin,
        e_f,
        first_order_entangled: perturbative.first_order_entangled,
        exact_entangled: perturbative.exact_entangled,
    })
}

/// One row of a parameter sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub beta_sq_numeric: Option<f64>,
    pub beta_sq_p1p2: Option<f64>,
    pub wkb_exponent: Option<f64>,
    pub error: Option<String>,
}

/// Evaluate the scenario at each parameter value; rows that fail carry their
/// error and do not interrupt the sweep. Rows are independent and evaluated
/// in parallel, output order follows the input order.
pub fn run_sweep(
    scenario: &Scenario,
    key: &str,
    values: &[f64],
    base_dir: &Path,
) -> Vec<SweepRow> {
    values
        .par_iter()
        .map(|&value| {
            let mut row_scenario = scenario.clone();
            row_scenario.analysis = AnalysisFlags {
                bogoliubov: true,
                p1p2: true,
                wkb: true,
                entanglement: false,
            };
            if let Err(e) = set_numeric_key(&mut row_scenario, key, value) {
                return SweepRow {
                    value,
                    beta_sq_numeric: None,
                    beta_sq_p1p2: None,
                    wkb_exponent: None,
                    error: Some(e.to_string()),
                };
            }
            match run_scenario(&row_scenario, base_dir) {
                Ok(result) => {
                    let numeric = result.modes.last().map(|m| m.coeffs.beta_sq());
                    let p1p2 = result
                        .p1p2
                        .as_ref()
                        .and_then(|r| r.as_ref().ok().map(|e| e.beta_sq));
                    let wkb = result.wkb.as_ref().and_then(|r| {
                        r.as_ref()
                            .ok()
                            .map(|w| w.contour.map(|c| c.exponent).unwrap_or(w.taylor_exponent))
                    });
                    SweepRow {
                        value,
                        beta_sq_numeric: numeric,
                        beta_sq_p1p2: p1p2,
                        wkb_exponent: wkb,
                        error: None,
                    }
                }
                Err(e) => SweepRow {
                    value,
                    beta_sq_numeric: None,
                    beta_sq_p1p2: None,
                    wkb_exponent: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Collision model exponents for every chain mode, dominant first; feeds the
/// higher-mode report of collision scenarios.
pub fn mode_ranking(
    config: &TrapConfig,
    model: &CollisionModel,
) -> Result<Vec<(usize, f64, f64)>> {
    let chain = solve_equilibrium(config)?;
    let spectrum = mode_spectrum(&coupling_matrix(&chain)?)?;
    let ranking = higher_mode_ranking(&spectrum, config.omega_rad, model)?;
    Ok(ranking
        .into_iter()
        .map(|(kappa, exponent)| {
            let beta = collision_beta_sq_for_mode(
                model,
                config.omega_rad,
                spectrum.eigenvalues[kappa].max(0.0),
            )
            .unwrap_or(f64::NAN);
            (kappa, exponent, beta)
        })
        .collect())
}
