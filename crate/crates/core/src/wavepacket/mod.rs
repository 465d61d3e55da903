//! Split-operator dynamics of a two-level atom in the double-well control
//! unit. Units: ħ = 1; the default geometry also sets `m_h = ω0 = 1`.

mod cycle;
mod evolve;
mod grid;
mod kick;
mod potential;
mod scatter;
mod spinor;

use thiserror::Error;

pub use cycle::{
    kinematics_cross_check, overlap_deficits, run_cycles, run_halting_cycle, ArrivalRow, CrossCheck, CycleRecord,
    CycleSetup, DeficitPoint, Stage, StageRecord, TrajectorySample, GROUND_LEVEL, HALT_LEVEL, KICK_LEAK, LOCKED_RIGHT,
};
pub use evolve::{evolve, SplitOperator};
pub use grid::{Fourier, Grid1D, MIN_POINTS};
pub use kick::{apply_kick, kick_train, KickDirection, KickSpec};
pub use potential::{barrier_potential, build_potential, PotentialSpec, PAD_FACTOR};
pub use scatter::{
    least_squares_slope, square_barrier_transmission, transmission_scan, transmission_with, tunneling_slope,
    ScatterPlan, SlopeFit, Transmission, SCAN_POINTS,
};
pub use spinor::{init_gaussian, measure, Measurement, SpinorWave, NORM_TOL};

use crate::kinematics::KinematicsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("grid: {0}")]
    Grid(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("packet support: {0}")]
    Support(String),
    #[error("dt = {dt} gives kinetic phase {phase} per step (limit π/4)")]
    Stability { dt: f64, phase: f64 },
    #[error("{what} drift {value:e} exceeds {budget:e}")]
    Drift { what: &'static str, value: f64, budget: f64 },
    #[error("bandwidth: {0}")]
    Bandwidth(String),
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("leakage at {stage}: {outside:e} of the norm outside the target region")]
    Leakage { stage: String, outside: f64 },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}
