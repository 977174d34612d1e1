//! Instance files, experiment configs, reports and the command line.

pub mod cli;
pub mod config;
pub mod io;
pub mod report;
pub mod suite;

pub use config::{ExperimentConfig, MechanismKind, Mode, OutputFormat};
pub use io::{instance_from_str, load_instance, load_instance_checked, load_irsg, parse_json};
pub use report::{estimate_ratio, evaluate, Mechanism, Ratio, Report};
pub use suite::{rows_to_csv, run_suite, ReportRow, COLUMNS};
