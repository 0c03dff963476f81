//! Flat `key = value` scenario files with unit suffixes and `#` comments.
//!
//! Frequencies are ordinary frequencies (Hz, kHz, MHz, GHz) and are converted
//! to angular frequencies on ingestion; times take s/ms/us/ns, temperatures
//! K/mK/uK.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use ionpair::ScaleOdeOptions;

/// Parse failure with the offending line when known.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// The axial drive of a scenario; exactly one per file.
#[derive(Debug, Clone, PartialEq)]
pub enum DriveSpec {
    /// Cosine-ramped pulse to a peak confinement (angular rad/s) with ramp
    /// and hold durations in seconds.
    Pulse { peak: f64, ramp: f64, hold: f64 },
    /// sech^2 collision: rocking-frequency depth and rate, angular rad/s.
    Collision { delta_omega: f64, rate: f64 },
    /// tanh expansion to a final axial confinement, angular rad/s.
    Expansion { omega_ax_final: f64, rate: f64 },
    /// Sampled waveform loaded from a CSV file.
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisFlags {
    pub bogoliubov: bool,
    pub entanglement: bool,
    pub wkb: bool,
    pub p1p2: bool,
}

impl Default for AnalysisFlags {
    fn default() -> Self {
        AnalysisFlags { bogoliubov: true, entanglement: false, wkb: false, p1p2: false }
    }
}

/// Thermal state inputs: a direct total occupation or a temperature.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThermalSpec {
    pub n_th: Option<f64>,
    pub temperature: Option<f64>,
}

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub mass_u: f64,
    pub charge: u32,
    pub n_ions: usize,
    /// Angular radial secular frequency (rad/s).
    pub omega_rad: f64,
    /// Angular initial axial frequency (rad/s).
    pub omega_ax: f64,
    pub drive: DriveSpec,
    pub analysis: AnalysisFlags,
    pub thermal: ThermalSpec,
    pub output_dir: PathBuf,
    pub ode: ScaleOdeOptions,
    /// Optional override of the simulation window end (s).
    pub t_out: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Frequency,
    Time,
    Temperature,
    Dimensionless,
    Integer,
    Boolean,
    Text,
    MassU,
}

const KNOWN_KEYS: &[(&str, Dim)] = &[
    ("ion.mass_u", Dim::MassU),
    ("ion.charge", Dim::Integer),
    ("trap.n_ions", Dim::Integer),
    ("trap.omega_rad", Dim::Frequency),
    ("trap.omega_ax", Dim::Frequency),
    ("drive.pulse.peak", Dim::Frequency),
    ("drive.pulse.ramp", Dim::Time),
    ("drive.pulse.hold", Dim::Time),
    ("drive.collision.delta_omega", Dim::Frequency),
    ("drive.collision.rate", Dim::Frequency),
    ("drive.expansion.omega_ax_final", Dim::Frequency),
    ("drive.expansion.rate", Dim::Frequency),
    ("drive.tabulated.path", Dim::Text),
    ("analysis.bogoliubov", Dim::Boolean),
    ("analysis.entanglement", Dim::Boolean),
    ("analysis.wkb", Dim::Boolean),
    ("analysis.p1p2", Dim::Boolean),
    ("thermal.n_th", Dim::Dimensionless),
    ("thermal.temperature", Dim::Temperature),
    ("output.dir", Dim::Text),
    ("ode.rtol", Dim::Dimensionless),
    ("ode.atol", Dim::Dimensionless),
    ("window.t_out", Dim::Time),
];

const REQUIRED_KEYS: &[&str] = &["ion.mass_u", "trap.n_ions", "trap.omega_rad", "trap.omega_ax"];

fn dim_of(key: &str) -> Option<Dim> {
    KNOWN_KEYS.iter().find(|(k, _)| *k == key).map(|(_, d)| *d)
}

struct RawEntry {
    line: usize,
    value: String,
}

/// Parse and validate a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let mut entries: BTreeMap<String, RawEntry> = BTreeMap::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError::at(lineno, format!("expected 'key = value', got '{line}'"))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if dim_of(&key).is_none() {
            return Err(ConfigError::at(lineno, format!("unknown key '{key}'")));
        }
        if let Some(previous) = entries.get(&key) {
            return Err(ConfigError::at(
                lineno,
                format!("duplicate key '{key}', first set on line {}", previous.line),
            ));
        }
        entries.insert(key, RawEntry { line: lineno, value });
    }

    let missing: Vec<&str> = REQUIRED_KEYS
        .iter()
        .filter(|k| !entries.contains_key(**k))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError::global(format!("missing required keys: {}", missing.join(", "))));
    }

    let get_f64 = |entries: &BTreeMap<String, RawEntry>, key: &str| -> Result<Option<f64>, ConfigError> {
        match entries.get(key) {
            None => Ok(None),
            Some(e) => parse_value(&e.value, dim_of(key).unwrap(), e.line).map(Some),
        }
    };
    let get_bool = |key: &str| -> Result<Option<bool>, ConfigError> {
        match entries.get(key) {
            None => Ok(None),
            Some(e) => match e.value.as_str() {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                other => Err(ConfigError::at(e.line, format!("expected true or false, got '{other}'"))),
            },
        }
    };

    let mass_u = get_f64(&entries, "ion.mass_u")?.unwrap();
    let charge = match entries.get("ion.charge") {
        None => 1,
        Some(e) => e.value.parse::<u32>().map_err(|_| {
            ConfigError::at(e.line, format!("expected a positive integer, got '{}'", e.value))
        })?,
    };
    let n_ions = {
        let e = entries.get("trap.n_ions").unwrap();
        e.value.parse::<usize>().map_err(|_| {
            ConfigError::at(e.line, format!("expected a positive integer, got '{}'", e.value))
        })?
    };
    let omega_rad = get_f64(&entries, "trap.omega_rad")?.unwrap();
    let omega_ax = get_f64(&entries, "trap.omega_ax")?.unwrap();
    if !(omega_rad > 0.0) || !(omega_ax > 0.0) {
        return Err(ConfigError::global("trap frequencies must be positive"));
    }

    // exactly one drive group
    let mut drives = Vec::new();
    if entries.contains_key("drive.pulse.peak") {
        let peak = get_f64(&entries, "drive.pulse.peak")?.unwrap();
        let ramp = get_f64(&entries, "drive.pulse.ramp")?
            .ok_or_else(|| ConfigError::global("drive.pulse.peak requires drive.pulse.ramp"))?;
        let hold = get_f64(&entries, "drive.pulse.hold")?
            .ok_or_else(|| ConfigError::global("drive.pulse.peak requires drive.pulse.hold"))?;
        drives.push(DriveSpec::Pulse { peak, ramp, hold });
    }
    if entries.contains_key("drive.collision.delta_omega") {
        let delta_omega = get_f64(&entries, "drive.collision.delta_omega")?.unwrap();
        let rate = get_f64(&entries, "drive.collision.rate")?.ok_or_else(|| {
            ConfigError::global("drive.collision.delta_omega requires drive.collision.rate")
        })?;
        drives.push(DriveSpec::Collision { delta_omega, rate });
    }
    if entries.contains_key("drive.expansion.omega_ax_final") {
        let omega_ax_final = get_f64(&entries, "drive.expansion.omega_ax_final")?.unwrap();
        let rate = get_f64(&entries, "drive.expansion.rate")?.ok_or_else(|| {
            ConfigError::global("drive.expansion.omega_ax_final requires drive.expansion.rate")
        })?;
        drives.push(DriveSpec::Expansion { omega_ax_final, rate });
    }
    if let Some(e) = entries.get("drive.tabulated.path") {
        drives.push(DriveSpec::Tabulated { path: PathBuf::from(&e.value) });
    }
    let drive = match drives.len() {
        0 => {
            return Err(ConfigError::global(
                "no drive specified; set one of drive.pulse.*, drive.collision.*, \
                 drive.expansion.* or drive.tabulated.path",
            ))
        }
        1 => drives.pop().unwrap(),
        n => {
            return Err(ConfigError::global(format!(
                "conflicting drives: {n} drive groups present, exactly one allowed"
            )))
        }
    };

    let analysis = AnalysisFlags {
        bogoliubov: get_bool("analysis.bogoliubov")?.unwrap_or(true),
        entanglement: get_bool("analysis.entanglement")?.unwrap_or(false),
        wkb: get_bool("analysis.wkb")?.unwrap_or(false),
        p1p2: get_bool("analysis.p1p2")?.unwrap_or(false),
    };

    let thermal = ThermalSpec {
        n_th: get_f64(&entries, "thermal.n_th")?,
        temperature: get_f64(&entries, "thermal.temperature")?,
    };
    if thermal.n_th.is_some() && thermal.temperature.is_some() {
        return Err(ConfigError::global(
            "set either thermal.n_th or thermal.temperature, not both",
        ));
    }

    let output_dir = entries
        .get("output.dir")
        .map(|e| PathBuf::from(&e.value))
        .unwrap_or_else(|| PathBuf::from("out"));

    let defaults = ScaleOdeOptions::default();
    let ode = ScaleOdeOptions {
        rtol: get_f64(&entries, "ode.rtol")?.unwrap_or(defaults.rtol),
        atol: get_f64(&entries, "ode.atol")?.unwrap_or(defaults.atol),
        residual_tol: defaults.residual_tol,
    };

    let t_out = get_f64(&entries, "window.t_out")?;

    Ok(Scenario {
        mass_u,
        charge,
        n_ions,
        omega_rad,
        omega_ax,
        drive,
        analysis,
        thermal,
        output_dir,
        ode,
        t_out,
    })
}

/// Parse `<number> [unit]` according to the key's dimension. Frequencies
/// convert from ordinary to angular.
fn parse_value(value: &str, dim: Dim, line: usize) -> Result<f64, ConfigError> {
    let tokens: Vec<&str> = value.split_whitespace().collect();
    let (number, unit): (&str, Option<&str>) = match tokens.as_slice() {
        [n] => (*n, None),
        [n, u] => (*n, Some(*u)),
        _ => return Err(ConfigError::at(line, format!("cannot parse value '{value}'"))),
    };
    let x: f64 = number
        .parse()
        .map_err(|_| ConfigError::at(line, format!("bad number '{number}'")))?;

    let bad_unit = |u: &str, expected: &str| {
        ConfigError::at(line, format!("bad unit suffix '{u}', expected one of {expected}"))
    };

    match dim {
        Dim::Frequency => {
            let factor = match unit {
                Some("Hz") => 1.0,
                Some("kHz") => 1e3,
                Some("MHz") => 1e6,
                Some("GHz") => 1e9,
                Some(u) => return Err(bad_unit(u, "Hz, kHz, MHz, GHz")),
                None => return Err(ConfigError::at(line, "frequency needs a unit suffix")),
            };
            Ok(std::f64::consts::TAU * x * factor)
        }
        Dim::Time => {
            let factor = match unit {
                Some("s") => 1.0,
                Some("ms") => 1e-3,
                Some("us") => 1e-6,
                Some("ns") => 1e-9,
                Some(u) => return Err(bad_unit(u, "s, ms, us, ns")),
                None => return Err(ConfigError::at(line, "time needs a unit suffix")),
            };
            Ok(x * factor)
        }
        Dim::Temperature => {
            let factor = match unit {
                Some("K") => 1.0,
                Some("mK") => 1e-3,
                Some("uK") => 1e-6,
                Some(u) => return Err(bad_unit(u, "K, mK, uK")),
                None => return Err(ConfigError::at(line, "temperature needs a unit suffix")),
            };
            Ok(x * factor)
        }
        Dim::MassU => match unit {
            None | Some("u") => Ok(x),
            Some(u) => Err(bad_unit(u, "u")),
        },
        Dim::Dimensionless => match unit {
            None => Ok(x),
            Some(u) => Err(bad_unit(u, "no suffix")),
        },
        Dim::Integer | Dim::Boolean | Dim::Text => {
            Err(ConfigError::at(line, "internal: non-numeric dimension"))
        }
    }
}

/// Set a numeric scenario field through its config-file key, using the same
/// unit convention as the file (frequencies in MHz, times in us).
pub fn set_numeric_key(scenario: &mut Scenario, key: &str, value: f64) -> Result<(), ConfigError> {
    let angular = std::f64::consts::TAU * value * 1e6; // MHz -> rad/s
    let seconds = value * 1e-6; // us -> s
    match (key, &mut scenario.drive) {
        ("trap.omega_rad", _) => scenario.omega_rad = angular,
        ("trap.omega_ax", _) => scenario.omega_ax = angular,
        ("ion.mass_u", _) => scenario.mass_u = value,
        ("thermal.n_th", _) => scenario.thermal.n_th = Some(value),
        ("drive.pulse.peak", DriveSpec::Pulse { peak, .. }) => *peak = angular,
        ("drive.pulse.ramp", DriveSpec::Pulse { ramp, .. }) => *ramp = seconds,
        ("drive.pulse.hold", DriveSpec::Pulse { hold, .. }) => *hold = seconds,
        ("drive.collision.delta_omega", DriveSpec::Collision { delta_omega, .. }) => {
            *delta_omega = angular
        }
        ("drive.collision.rate", DriveSpec::Collision { rate, .. }) => *rate = angular,
        ("drive.expansion.omega_ax_final", DriveSpec::Expansion { omega_ax_final, .. }) => {
            *omega_ax_final = angular
        }
        ("drive.expansion.rate", DriveSpec::Expansion { rate, .. }) => *rate = angular,
        (key, _) => {
            return Err(ConfigError::global(format!(
                "key '{key}' is not sweepable for this scenario's drive"
            )))
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    const GOOD: &str = "\
# two-ion demo
ion.mass_u       = 25
trap.n_ions      = 2
trap.omega_rad   = 3.5 MHz
trap.omega_ax    = 0.2 MHz
drive.pulse.peak = 0.7 MHz
drive.pulse.ramp = 0.5 us
drive.pulse.hold = 0.5 us
";

    #[test]
    fn parses_and_converts_units() {
        let s = parse_scenario(GOOD).unwrap();
        assert_relative_eq!(s.omega_rad, TAU * 3.5e6, max_relative = 1e-12);
        assert_relative_eq!(s.omega_ax, TAU * 0.2e6, max_relative = 1e-12);
        assert_eq!(s.charge, 1);
        match s.drive {
            DriveSpec::Pulse { peak, ramp, hold } => {
                assert_relative_eq!(peak, TAU * 0.7e6, max_relative = 1e-12);
                assert_relative_eq!(ramp, 0.5e-6, max_relative = 1e-12);
                assert_relative_eq!(hold, 0.5e-6, max_relative = 1e-12);
            }
            other => panic!("wrong drive {other:?}"),
        }
        assert!(s.analysis.bogoliubov);
        assert!(!s.analysis.entanglement);
    }

    #[test]
    fn empty_document_lists_required_keys() {
        let err = parse_scenario("").unwrap_err();
        assert!(err.message.contains("ion.mass_u"));
        assert!(err.message.contains("trap.omega_rad"));
        assert!(err.message.contains("trap.omega_ax"));
    }

    #[test]
    fn duplicate_key_names_both_lines() {
        let text = format!("{GOOD}trap.omega_ax = 0.3 MHz\n");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.line, Some(9));
        assert!(err.message.contains("line 5"), "{}", err.message);
    }

    #[test]
    fn unknown_key_is_located() {
        let text = format!("{GOOD}trap.bogus = 1\n");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.line, Some(9));
        assert!(err.message.contains("bogus"));
    }

    #[test]
    fn bad_unit_suffix_is_located() {
        let text = GOOD.replace("0.2 MHz", "0.2 THz");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.line, Some(5));
        assert!(err.message.contains("bad unit suffix"));
    }

    #[test]
    fn missing_unit_is_rejected() {
        let text = GOOD.replace("0.2 MHz", "0.2");
        assert!(parse_scenario(&text).is_err());
    }

    #[test]
    fn conflicting_drives_are_rejected() {
        let text = format!("{GOOD}drive.collision.delta_omega = 1 MHz\ndrive.collision.rate = 0.3 MHz\n");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.message.contains("conflicting drives"));
    }

    #[test]
    fn thermal_inputs_are_exclusive() {
        let text = format!("{GOOD}thermal.n_th = 0.05\nthermal.temperature = 10 uK\n");
        assert!(parse_scenario(&text).is_err());
    }

    #[test]
    fn sweep_key_conversion() {
        let mut s = parse_scenario(GOOD).unwrap();
        set_numeric_key(&mut s, "drive.pulse.peak", 0.5).unwrap();
        match s.drive {
            DriveSpec::Pulse { peak, .. } => {
                assert_relative_eq!(peak, TAU * 0.5e6, max_relative = 1e-12)
            }
            _ => unreachable!(),
        }
        assert!(set_numeric_key(&mut s, "drive.collision.rate", 0.3).is_err());
        assert!(set_numeric_key(&mut s, "analysis.wkb", 1.0).is_err());
    }
}
