//! Instance files, random generation, experiments and the CLI.

pub mod cli;
pub mod experiment;
pub mod format;
pub mod generate;

pub use cli::{cli, run};
pub use experiment::{replay_report, run_experiment, ExperimentConfig, Report, REPORT_SCHEMA};
pub use format::{format_rational, load_instance, parse_instance, parse_rational, save_instance, serialize_instance};
pub use generate::{generate_instance, InstanceSpec, OwaScheme, UtilityScheme};
