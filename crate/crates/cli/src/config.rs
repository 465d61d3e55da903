//! Flat `key = value` experiment configs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, ConfigError};

/// Environment variable that overrides the `output` key.
pub const OUTPUT_DIR_ENV: &str = "UNIHALT_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    Protocol,
    Fidelity,
    Scatter,
    Squeeze,
    Kinematics,
    FullCycle,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Protocol,
        Experiment::Fidelity,
        Experiment::Scatter,
        Experiment::Squeeze,
        Experiment::Kinematics,
        Experiment::FullCycle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Protocol => "protocol",
            Experiment::Fidelity => "fidelity",
            Experiment::Scatter => "scatter",
            Experiment::Squeeze => "squeeze",
            Experiment::Kinematics => "kinematics",
            Experiment::FullCycle => "full-cycle",
        }
    }

    /// Keys accepted by the experiment with their defaults; `None` marks a
    /// required key.
    pub fn keys(self) -> &'static [(&'static str, Option<&'static str>)] {
        match self {
            Experiment::Protocol => &[
                ("p", None),
                ("k", Some("max")),
                ("kind", Some("multiplicative")),
                ("variant", Some("qc")),
                ("lock", Some("ideal")),
                ("epsilon", Some("0.1")),
            ],
            Experiment::Fidelity => &[
                ("ratios", None),
                ("cycles", Some("last")),
                ("regime", Some("one")),
                ("m_r", Some("4")),
                ("dt_b", Some("0.1")),
                ("dt_h", Some("0.1")),
                ("dt_h2", Some("0.1")),
                ("dt_r", Some("0.1")),
                ("dt0", Some("0.4")),
                ("dt_f", Some("0.2")),
                ("t_d", Some("0.1")),
                ("t_a", Some("0.1")),
                ("v", Some("1")),
                ("e_h", Some("10")),
                ("omega0", Some("1")),
                ("omega_c", Some("0.25")),
                ("alpha_c_sq", Some("2")),
            ],
            Experiment::Scatter => &[
                ("E", None),
                ("V0", None),
                ("a", Some("")),
                ("beta_a", Some("")),
                ("n", Some("4096")),
                ("mass", Some("1")),
            ],
            Experiment::Squeeze => &[("samples", None), ("r_max", Some("1")), ("alpha_max", Some("1.5"))],
            Experiment::Kinematics => &[("ratio", Some("0.1"))],
            Experiment::FullCycle => &[("ratio", Some("0.1")), ("cycles", Some("1,2,3,4")), ("sample_every", Some("0"))],
        }
    }

    /// Whether the experiment draws random samples and so needs a seed.
    pub fn needs_seed(self) -> bool {
        self == Experiment::Squeeze
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().replace('_', "-");
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == norm)
            .ok_or_else(|| ConfigError::Experiment(s.to_string()))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Keys every experiment accepts.
const COMMON: &[&str] = &["experiment", "seed", "output", "threads"];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output: PathBuf,
    /// Worker threads for sweeps; `0` uses the global pool.
    pub threads: usize,
    params: BTreeMap<String, String>,
}

/// Parse `key = value` lines. `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Build from pairs; later pairs win, so overrides go last.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            map.insert(k.clone(), v.clone());
        }
        let experiment: Experiment =
            map.get("experiment").ok_or_else(|| ConfigError::Missing("experiment".into()))?.parse()?;
        let allowed = experiment.keys();
        for key in map.keys() {
            if !COMMON.contains(&key.as_str()) && !allowed.iter().any(|(k, _)| k == key) {
                return Err(ConfigError::Unknown { key: key.clone(), experiment: experiment.name().into() });
            }
        }
        for (key, default) in allowed {
            if default.is_none() && !map.contains_key(*key) {
                return Err(ConfigError::Missing((*key).into()));
            }
        }
        let seed = match map.get("seed") {
            Some(s) => s.parse().map_err(|_| ConfigError::invalid("seed", s, "not a non-negative integer"))?,
            None if experiment.needs_seed() => return Err(ConfigError::Missing("seed".into())),
            None => 0,
        };
        let threads = match map.get("threads") {
            Some(s) => s.parse().map_err(|_| ConfigError::invalid("threads", s, "not a non-negative integer"))?,
            None => 0,
        };
        let output = std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .or_else(|| map.get("output").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        let cfg = ExperimentConfig { experiment, seed, output, threads, params: map };
        Ok(cfg)
    }

    /// Read a config file and apply `key=value` overrides.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut pairs = parse_pairs(&text)?;
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: 0, text: o.clone() })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Self::from_pairs(&pairs)?)
    }

    /// Raw value with the experiment default filled in.
    pub fn raw(&self, key: &str) -> Result<&str, ConfigError> {
        if let Some(v) = self.params.get(key) {
            return Ok(v);
        }
        self.experiment
            .keys()
            .iter()
            .find(|(k, _)| *k == key)
            .and_then(|(_, d)| *d)
            .ok_or_else(|| ConfigError::Missing(key.into()))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let raw = self.raw(key)?;
        raw.parse().map_err(|_| ConfigError::invalid(key, raw, format!("expected {}", std::any::type_name::<T>())))
    }

    /// Finite float.
    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v: f64 = self.get(key)?;
        if !v.is_finite() {
            return Err(ConfigError::invalid(key, v, "must be finite"));
        }
        Ok(v)
    }

    /// Comma-separated list; empty text is the empty list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError> {
        let raw = self.raw(key)?;
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| ConfigError::invalid(key, s, "bad list element")))
            .collect()
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.params.contains_key(key)
    }
}
