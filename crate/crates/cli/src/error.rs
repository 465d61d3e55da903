use std::path::PathBuf;

use unihalt_core::{GroupError, KinematicsError, ModulationError, OscillatorError, ProtocolError, WaveError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{module}: {message}")]
    Numerical { module: &'static str, message: String },
    #[error("validation failed: {failed} of {total} checks")]
    Validation { failed: usize, total: usize },
}

impl CliError {
    /// Process exit code by category.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Csv { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Validation { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("unknown key `{key}` for experiment {experiment}")]
    Unknown { key: String, experiment: String },
    #[error("key `{key}`: cannot use `{value}` ({reason})")]
    Invalid { key: String, value: String, reason: String },
    #[error("unknown experiment `{0}`")]
    Experiment(String),
}

impl ConfigError {
    pub fn invalid(key: &str, value: impl ToString, reason: impl ToString) -> Self {
        ConfigError::Invalid { key: key.to_string(), value: value.to_string(), reason: reason.to_string() }
    }
}

macro_rules! numerical {
    ($($ty:ty => $module:literal),* $(,)?) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Numerical { module: $module, message: e.to_string() }
            }
        }
    )*};
}

numerical! {
    GroupError => "cyclic_group",
    ProtocolError => "protocol_engine",
    OscillatorError => "oscillator_analytics",
    ModulationError => "frequency_modulation",
    WaveError => "wavepacket_sim",
}

impl From<KinematicsError> for CliError {
    fn from(e: KinematicsError) -> Self {
        match e {
            // Schedule fields come straight from config keys.
            KinematicsError::Invalid { field, reason } => {
                CliError::Config(ConfigError::Invalid { key: field.to_string(), value: String::new(), reason })
            }
            other => CliError::Numerical { module: "control_kinematics", message: other.to_string() },
        }
    }
}
