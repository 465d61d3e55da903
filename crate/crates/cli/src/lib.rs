//! Config-driven experiment runner and validation suite for `unihalt-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod validate;

pub use config::{parse_pairs, Experiment, ExperimentConfig, OUTPUT_DIR_ENV};
pub use error::{CliError, ConfigError};
pub use experiments::{compute, run_experiment, RunSummary};
pub use output::{tables_of, Cell, Table};
pub use validate::{validate_suite, Check, Fault, Level, Report};
