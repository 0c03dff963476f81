//! Batch CLI for phonon pair-creation scenarios.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure.
//! Informational text goes to stderr; data goes to files or stdout.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ionpair_cli::config::{parse_scenario, AnalysisFlags, DriveSpec, Scenario, ThermalSpec};
use ionpair_cli::report;
use ionpair_cli::scenario::{run_scenario, run_sweep};

#[derive(Parser)]
#[command(
    name = "ionpair",
    about = "Phonon pair creation in driven trapped-ion chains",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and print the equilibrium chain and mode spectrum.
    Equilibrium { config: PathBuf },
    /// Run a full scenario: scale dynamics, Bogoliubov coefficients,
    /// requested approximations, figure files.
    Simulate {
        config: PathBuf,
        /// Override the scenario's output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Sweep one numeric scenario key and print the comparison table.
    Sweep {
        config: PathBuf,
        /// Dotted scenario key, e.g. drive.pulse.peak (value units: MHz/us).
        #[arg(long)]
        param: String,
        /// start:stop:count or start:stop:count:log
        #[arg(long)]
        range: String,
        /// Write the table to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entanglement analysis at a given total thermal occupation.
    Entangle {
        config: PathBuf,
        #[arg(long)]
        n_th: f64,
    },
    /// Reproduce a canonical result: fig1, fig2, fig3 or headline.
    Reproduce {
        target: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version to stdout itself; those are success
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(EXIT_VALIDATION);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_VALIDATION,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<ionpair::Error> for CliError {
    fn from(e: ionpair::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

fn load_scenario(path: &Path) -> Result<(Scenario, PathBuf), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let scenario = parse_scenario(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    Ok((scenario, base))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Equilibrium { config } => {
            let (scenario, _) = load_scenario(&config)?;
            let species = ionpair::IonSpecies::from_atomic_mass(scenario.mass_u, scenario.charge)?;
            let trap = ionpair::TrapConfig::new(
                species,
                scenario.n_ions,
                scenario.omega_rad,
                scenario.omega_ax,
            )?;
            let chain = ionpair::solve_equilibrium(&trap)?;
            let spectrum = ionpair::mode_spectrum(&ionpair::coupling_matrix(&chain)?)?;
            println!("gamma_m3_per_s2 = {}", chain.gamma());
            let positions: Vec<String> =
                chain.positions().iter().map(|x| format!("{}", x * 1e6)).collect();
            println!("positions_um = {}", positions.join(" "));
            if let Ok(dx) = chain.separation() {
                println!("delta_x_eq_um = {}", dx * 1e6);
                println!(
                    "critical_distance_um = {}",
                    ionpair::critical_scale(&trap) * dx * 1e6
                );
            }
            println!("b_crit = {}", ionpair::critical_scale(&trap));
            let freqs: Vec<String> = spectrum
                .eigenvalues
                .iter()
                .map(|w2| format!("{}", w2.max(0.0).sqrt() / TAU / 1e6))
                .collect();
            println!("mode_frequencies_MHz = {}", freqs.join(" "));
            Ok(())
        }

        Command::Simulate { config, out_dir } => {
            let (scenario, base) = load_scenario(&config)?;
            eprintln!("running scenario {}", config.display());
            let result = run_scenario(&scenario, &base)?;
            let dir = out_dir.unwrap_or_else(|| scenario.output_dir.clone());
            let written = report::emit_figures(&result, &dir)
                .map_err(|e| CliError::Io(format!("cannot write figures: {e}")))?;
            for path in &written {
                eprintln!("wrote {}", path.display());
            }
            for line in report::summary_lines(&result) {
                println!("{line}");
            }
            Ok(())
        }

        Command::Sweep { config, param, range, out } => {
            let (scenario, base) = load_scenario(&config)?;
            let values = parse_range(&range).map_err(CliError::Validation)?;
            eprintln!("sweeping {param} over {} values", values.len());
            let rows = run_sweep(&scenario, &param, &values, &base);
            let table = report::sweep_csv(&param, &rows);
            match out {
                Some(path) => {
                    std::fs::write(&path, table)
                        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{table}"),
            }
            Ok(())
        }

        Command::Entangle { config, n_th } => {
            let (mut scenario, base) = load_scenario(&config)?;
            scenario.thermal = ThermalSpec { n_th: Some(n_th), temperature: None };
            scenario.analysis.bogoliubov = true;
            scenario.analysis.entanglement = true;
            let result = run_scenario(&scenario, &base)?;
            match &result.entanglement {
                Some(Ok(_)) => {
                    let is_mode_line = |l: &str| {
                        l.strip_prefix("mode")
                            .and_then(|rest| rest.bytes().next())
                            .is_some_and(|b| b.is_ascii_digit())
                    };
                    for line in report::summary_lines(&result)
                        .iter()
                        .filter(|l| l.starts_with("entanglement.") || is_mode_line(l))
                    {
                        println!("{line}");
                    }
                    Ok(())
                }
                Some(Err(e)) => Err(CliError::Validation(e.clone())),
                None => unreachable!("entanglement analysis was requested"),
            }
        }

        Command::Reproduce { target, out_dir } => reproduce(&target, &out_dir),
    }
}

/// The canonical two-ion magnesium scenario driven by the pulsed confinement.
fn canonical_scenario() -> Scenario {
    Scenario {
        mass_u: 25.0,
        charge: 1,
        n_ions: 2,
        omega_rad: TAU * 3.5e6,
        omega_ax: TAU * 0.2e6,
        drive: DriveSpec::Pulse { peak: TAU * 0.7e6, ramp: 0.5e-6, hold: 0.5e-6 },
        analysis: AnalysisFlags { bogoliubov: true, entanglement: true, wkb: true, p1p2: true },
        thermal: ThermalSpec { n_th: Some(0.05), temperature: None },
        output_dir: PathBuf::from("."),
        ode: ionpair::ScaleOdeOptions::default(),
        t_out: None,
    }
}

fn reproduce(target: &str, out_dir: &Path) -> Result<(), CliError> {
    let scenario = canonical_scenario();
    match target {
        "fig1" | "fig2" => {
            let result = run_scenario(&scenario, Path::new("."))?;
            std::fs::create_dir_all(out_dir)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
            let path = if target == "fig1" {
                let p = out_dir.join("fig_wax.csv");
                std::fs::write(&p, report::waveform_csv(&result))
                    .map_err(|e| CliError::Io(e.to_string()))?;
                p
            } else {
                let p = out_dir.join("fig_delta_x.csv");
                let csv = report::separation_csv(&result)
                    .expect("two-ion scenario always has a separation series");
                std::fs::write(&p, csv).map_err(|e| CliError::Io(e.to_string()))?;
                p
            };
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        "fig3" => {
            let values: Vec<f64> = (0..11).map(|k| 0.3 + 0.05 * k as f64).collect();
            let rows = run_sweep(&scenario, "drive.pulse.peak", &values, Path::new("."));
            for row in &rows {
                if let Some(e) = &row.error {
                    eprintln!("peak {} MHz failed: {e}", row.value);
                }
            }
            let path = report::emit_comparison(&rows, out_dir)
                .map_err(|e| CliError::Io(e.to_string()))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        "headline" => {
            let result = run_scenario(&scenario, Path::new("."))?;
            let rocking = result.modes.last().expect("bogoliubov stage enabled");
            println!("beta_sq_numeric = {}", rocking.coeffs.beta_sq());
            if let Some(Ok(est)) = &result.p1p2 {
                println!("beta_sq_p1p2 = {}", est.beta_sq);
            }
            println!("mean_phonons = {}", rocking.mean_phonons);
            println!("xi_abs = {}", rocking.xi.magnitude());
            if let Some(Ok(ent)) = &result.entanglement {
                println!("n_th = {}", ent.n_plus + ent.n_minus);
                println!("entangled = {}", ent.entangled);
                println!("lambda_minus_pt = {}", ent.lambda_minus);
                if let Some(ef) = ent.e_f {
                    println!("e_f = {ef}");
                }
            }
            Ok(())
        }
        other => Err(CliError::Validation(format!(
            "unknown reproduction target '{other}'; expected fig1, fig2, fig3 or headline"
        ))),
    }
}

/// Parse "start:stop:count" with an optional ":log" suffix.
fn parse_range(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let (nums, log) = match parts.as_slice() {
        [a, b, n] => ((*a, *b, *n), false),
        [a, b, n, "log"] => ((*a, *b, *n), true),
        _ => return Err(format!("bad range '{spec}', expected start:stop:count[:log]")),
    };
    let start: f64 = nums.0.parse().map_err(|_| format!("bad range start '{}'", nums.0))?;
    let stop: f64 = nums.1.parse().map_err(|_| format!("bad range stop '{}'", nums.1))?;
    let count: usize = nums.2.parse().map_err(|_| format!("bad range count '{}'", nums.2))?;
    if count < 2 {
        return Err("range count must be at least 2".into());
    }
    if log && (start <= 0.0 || stop <= 0.0) {
        return Err("log spacing requires positive endpoints".into());
    }
    let values = (0..count)
        .map(|i| {
            let s = i as f64 / (count - 1) as f64;
            if log {
                (start.ln() + s * (stop.ln() - start.ln())).exp()
            } else {
                start + s * (stop - start)
            }
        })
        .collect();
    Ok(values)
}
