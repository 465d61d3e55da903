//! CSV schemas and writers.

use std::path::{Path, PathBuf};

use crate::config::Experiment;
use crate::error::CliError;

pub const PROTOCOL: &[&str] = &["x0", "trigger_cycle", "final_level", "final_branch", "final_functional", "probability"];
pub const FIDELITY: &[&str] = &["j", "ratio", "regime", "probability_analytic", "probability_series"];
pub const SCATTER: &[&str] = &["a", "E", "V0", "T_numeric", "T_analytic"];
pub const KINEMATICS: &[&str] = &["i", "j", "T_i", "dT_ji_analytic", "dT_ji_measured"];
pub const SQUEEZE: &[&str] =
    &["r", "phi", "alpha_re", "alpha_im", "amp_analytic_re", "amp_analytic_im", "amp_numeric_abs_err"];
pub const FULL_CYCLE: &[&str] = &[
    "cycle",
    "trigger_time",
    "decel_time",
    "locked_position",
    "locked_spread",
    "locked_p_right",
    "bounce_time",
    "arrival_time",
    "final_time",
    "final_overlap",
];
pub const TRAJECTORY: &[&str] = &["cycle", "t", "mean_x", "mean_p", "p_left", "p_right"];

/// `(file stem, header)` of every table an experiment writes.
pub fn tables_of(experiment: Experiment) -> &'static [(&'static str, &'static [&'static str])] {
    match experiment {
        Experiment::Protocol => &[("protocol", PROTOCOL)],
        Experiment::Fidelity => &[("fidelity", FIDELITY)],
        Experiment::Scatter => &[("scatter", SCATTER)],
        Experiment::Squeeze => &[("squeeze", SQUEEZE)],
        Experiment::Kinematics => &[("kinematics", KINEMATICS)],
        Experiment::FullCycle => &[("full_cycle", FULL_CYCLE), ("trajectory", TRAJECTORY)],
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => fmt_f64(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<u8> for Cell {
    fn from(i: u8) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, header: &'static [&'static str]) -> Self {
        Table { name, header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(format!("{}.csv", self.name));
        let csv_err = |source| CliError::Csv { path: path.clone(), source };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }
}
