//! Scenario ingestion, orchestration and reporting behind the `ionpair`
//! command-line interface.

pub mod config;
pub mod report;
pub mod scenario;

pub use config::{parse_scenario, set_numeric_key, ConfigError, DriveSpec, Scenario};
pub use scenario::{run_scenario, run_sweep, ScenarioResult, SweepRow};
