//! Machine-readable outputs: figure CSV files and the key = value summary.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::scenario::{ScenarioResult, SweepRow};

/// Axial confinement over time: `fig_wax.csv` with columns
/// (t_us, omega_ax_over_2pi_MHz).
pub fn waveform_csv(result: &ScenarioResult) -> String {
    let mut out = String::from("t_us,omega_ax_over_2pi_MHz\n");
    for (t, w_sq) in result.series.t.iter().zip(&result.series.omega_ax_sq) {
        let f_mhz = w_sq.max(0.0).sqrt() / TAU / 1e6;
        let _ = writeln!(out, "{},{}", t * 1e6, f_mhz);
    }
    out
}

/// Classical separation over time: `fig_delta_x.csv` with columns
/// (t_us, delta_x_um, critical_distance_um).
pub fn separation_csv(result: &ScenarioResult) -> Option<String> {
    let dx_eq = result.delta_x_eq?;
    let critical_um = result.b_crit * dx_eq * 1e6;
    let mut out = String::from("t_us,delta_x_um,critical_distance_um\n");
    for (t, dx) in result.series.t.iter().zip(&result.series.delta_x) {
        let _ = writeln!(out, "{},{},{critical_um}", t * 1e6, dx * 1e6);
    }
    Some(out)
}

/// Sweep table: `fig_comparison.csv` with columns
/// (omega_ax_max_over_2pi_MHz, beta_sq_numeric, beta_sq_p1p2).
pub fn comparison_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("omega_ax_max_over_2pi_MHz,beta_sq_numeric,beta_sq_p1p2\n");
    for row in rows {
        if row.error.is_some() {
            continue;
        }
        let _ = writeln!(
            out,
            "{},{},{}",
            row.value,
            row.beta_sq_numeric.map(|v| v.to_string()).unwrap_or_default(),
            row.beta_sq_p1p2.map(|v| v.to_string()).unwrap_or_default(),
        );
    }
    out
}

/// Full sweep table for stdout/file, error column included.
pub fn sweep_csv(key: &str, rows: &[SweepRow]) -> String {
    let mut out = format!("{key},beta_sq_numeric,beta_sq_p1p2,wkb_exponent,error\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.value,
            row.beta_sq_numeric.map(|v| v.to_string()).unwrap_or_default(),
            row.beta_sq_p1p2.map(|v| v.to_string()).unwrap_or_default(),
            row.wkb_exponent.map(|v| v.to_string()).unwrap_or_default(),
            row.error.as_deref().map(csv_quote).unwrap_or_default(),
        );
    }
    out
}

fn csv_quote(text: &str) -> String {
    format!("\"{}\"", text.replace('"', "\"\""))
}

/// Ordered key = value summary of a scenario run.
pub fn summary_lines(result: &ScenarioResult) -> Vec<String> {
    let mut lines = Vec::new();
    lines.push(format!("gamma_m3_per_s2 = {}", result.gamma));
    let positions: Vec<String> =
        result.positions.iter().map(|x| format!("{}", x * 1e6)).collect();
    lines.push(format!("positions_um = {}", positions.join(" ")));
    if let Some(dx) = result.delta_x_eq {
        lines.push(format!("delta_x_eq_um = {}", dx * 1e6));
        lines.push(format!("critical_distance_um = {}", result.b_crit * dx * 1e6));
    }
    lines.push(format!("b_crit = {}", result.b_crit));
    let eigen: Vec<String> = result
        .mode_eigenvalues
        .iter()
        .map(|w2| format!("{}", w2.max(0.0).sqrt() / TAU / 1e6))
        .collect();
    lines.push(format!("mode_frequencies_MHz = {}", eigen.join(" ")));
    lines.push(format!("window_us = {} {}", result.window.0 * 1e6, result.window.1 * 1e6));
    lines.push(format!("t_extract_us = {}", result.t_extract * 1e6));
    lines.push(format!("b_min = {}", result.b_min));
    lines.push(format!("t_min_us = {}", result.t_min * 1e6));
    if !result.repulsive_intervals.is_empty() {
        let spans: Vec<String> = result
            .repulsive_intervals
            .iter()
            .map(|(a, b)| format!("{}:{}", a * 1e6, b * 1e6))
            .collect();
        lines.push(format!("repulsive_intervals_us = {}", spans.join(" ")));
    }
    for mode in &result.modes {
        let k = mode.kappa;
        lines.push(format!("mode{k}.omega_in_MHz = {}", mode.omega_in / TAU / 1e6));
        lines.push(format!("mode{k}.omega_out_MHz = {}", mode.omega_out / TAU / 1e6));
        lines.push(format!("mode{k}.beta_sq = {}", mode.coeffs.beta_sq()));
        lines.push(format!("mode{k}.mean_phonons = {}", mode.mean_phonons));
        lines.push(format!("mode{k}.xi_abs = {}", mode.xi.magnitude()));
    }
    match &result.p1p2 {
        Some(Ok(est)) => {
            lines.push(format!("p1p2.p1 = {}", est.p1));
            lines.push(format!("p1p2.p2 = {}", est.p2));
            lines.push(format!("p1p2.beta_sq = {}", est.beta_sq));
        }
        Some(Err(e)) => lines.push(format!("p1p2.error = {e}")),
        None => {}
    }
    match &result.wkb {
        Some(Ok(wkb)) => {
            lines.push(format!("wkb.taylor_exponent = {}", wkb.taylor_exponent));
            if let Some(c) = &wkb.contour {
                lines.push(format!("wkb.contour_exponent = {}", c.exponent));
                lines.push(format!("wkb.turning_point_im_us = {}", c.turning_point.im * 1e6));
                lines.push(format!("wkb.assumptions_ok = {}", c.assumptions_ok));
            }
        }
        Some(Err(e)) => lines.push(format!("wkb.error = {e}")),
        None => {}
    }
    match &result.entanglement {
        Some(Ok(ent)) => {
            lines.push(format!("entanglement.n_plus = {}", ent.n_plus));
            lines.push(format!("entanglement.n_minus = {}", ent.n_minus));
            lines.push(format!("entanglement.xi_abs = {}", ent.xi_abs));
            lines.push(format!("entanglement.lambda_minus_pt = {}", ent.lambda_minus));
            lines.push(format!("entanglement.lambda_plus_pt = {}", ent.lambda_plus));
            lines.push(format!("entanglement.entangled = {}", ent.entangled));
            lines.push(format!("entanglement.margin = {}", ent.margin));
            if let Some(ef) = ent.e_f {
                lines.push(format!("entanglement.e_f = {ef}"));
            }
            lines.push(format!(
                "entanglement.first_order_entangled = {}",
                ent.first_order_entangled
            ));
            lines.push(format!("entanglement.exact_entangled = {}", ent.exact_entangled));
        }
        Some(Err(e)) => lines.push(format!("entanglement.error = {e}")),
        None => {}
    }
    lines
}

/// Write the scenario figure files into `dir`, returning the paths written.
pub fn emit_figures(result: &ScenarioResult, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let wax = dir.join("fig_wax.csv");
    fs::write(&wax, waveform_csv(result))?;
    written.push(wax);

    if let Some(csv) = separation_csv(result) {
        let path = dir.join("fig_delta_x.csv");
        fs::write(&path, csv)?;
        written.push(path);
    }
    Ok(written)
}

/// Write the sweep comparison figure into `dir`.
pub fn emit_comparison(rows: &[SweepRow], dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("fig_comparison.csv");
    fs::write(&path, comparison_csv(rows))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_rows_leave_comparison_header_only() {
        let rows = vec![SweepRow {
            value: 0.9,
            beta_sq_numeric: None,
            beta_sq_p1p2: None,
            wkb_exponent: None,
            error: Some("unstable".into()),
        }];
        assert_eq!(comparison_csv(&rows), "omega_ax_max_over_2pi_MHz,beta_sq_numeric,beta_sq_p1p2\n");
        let table = sweep_csv("drive.pulse.peak", &rows);
        assert!(table.lines().nth(1).unwrap().contains("\"unstable\""));
    }
}
