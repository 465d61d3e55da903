//! Schedule arithmetic of the halting cycle: stage times, end positions of
//! the decelerated packets, arrival times, predicted transfer fidelities and
//! the search threshold.

use thiserror::Error;

use crate::oscillator::{amplitude_aj, probability_exact, probability_series};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("invalid schedule: {field} {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("cycle index {j} outside 1..={m_r}")]
    CycleIndex { j: usize, m_r: usize },
    #[error("rotation-pulse argument {arg} >= 1; quadratic estimate out of regime")]
    OutOfRegime { arg: f64 },
    #[error("search threshold needs n >= 1 and p_n >= 1 (got n = {n}, p_n = {p_n})")]
    Threshold { n: u32, p_n: f64 },
}

/// Timing and velocity parameters of one protocol run. The cycle period is
/// the sum of the stage durations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleConfig {
    pub m_r: usize,
    pub dt_b: f64,
    pub dt_h: f64,
    pub dt_h2: f64,
    pub dt_r: f64,
    /// Trigger to start of deceleration.
    pub dt0: f64,
    pub dt_f: f64,
    /// Duration of the decelerating sequence.
    pub t_d: f64,
    /// Duration of the accelerating sequence.
    pub t_a: f64,
    pub v_h: f64,
    pub v0: f64,
    pub v: f64,
    pub omega0: f64,
    pub omega_c: f64,
    pub e_h: f64,
    pub m_h: f64,
    /// Position right after the deceleration, `R2(t_mi + T_D)`.
    pub r2_ref: f64,
    /// Wave-packet spread.
    pub spread: f64,
    /// Mean quanta `|α_c|²` in the retuned well.
    pub alpha_c_sq: f64,
    /// Path length from `R_{2,1}` via the wall to the arrival point.
    pub return_distance: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            m_r: 4,
            dt_b: 0.005,
            dt_h: 0.005,
            dt_h2: 0.005,
            dt_r: 0.005,
            dt0: 0.2,
            dt_f: 0.08,
            t_d: 0.01,
            t_a: 0.01,
            v_h: 1800f64.sqrt(),
            v0: 0.1 * 1800f64.sqrt(),
            v: 1800f64.sqrt(),
            omega0: 1.0,
            omega_c: 0.25,
            e_h: 900.0,
            m_h: 1.0,
            r2_ref: 0.0,
            spread: 1.0,
            alpha_c_sq: 1.0,
            return_distance: 30.0,
        }
    }
}

impl ScheduleConfig {
    /// `ΔT`.
    pub fn period(&self) -> f64 {
        self.dt_b + self.dt_h + self.dt_h2 + self.dt_r + self.dt0 + self.dt_f
    }

    /// Time-compressing factor `v0 / v`.
    pub fn ratio(&self) -> f64 {
        self.v0 / self.v
    }

    /// Trigger time `t_0i` of cycle `i`.
    pub fn trigger_time(&self, i: usize) -> f64 {
        (i as f64 - 1.0) * self.period() + self.dt_b + self.dt_h + self.dt_h2 + self.dt_r
    }

    /// Start of deceleration `t_mi`.
    pub fn decel_time(&self, i: usize) -> f64 {
        self.trigger_time(i) + self.dt0
    }

    /// End of the computation, `m_r ΔT`.
    pub fn end_time(&self) -> f64 {
        self.m_r as f64 * self.period()
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        let bad = |field, reason: String| Err(KinematicsError::Invalid { field, reason });
        if self.m_r < 1 {
            return bad("m_r", "must be at least 1".into());
        }
        for (field, val) in [
            ("dt_b", self.dt_b),
            ("dt_h", self.dt_h),
            ("dt_h2", self.dt_h2),
            ("dt_r", self.dt_r),
            ("dt0", self.dt0),
            ("dt_f", self.dt_f),
            ("t_d", self.t_d),
            ("t_a", self.t_a),
            ("spread", self.spread),
            ("alpha_c_sq", self.alpha_c_sq),
            ("return_distance", self.return_distance),
        ] {
            if !(val >= 0.0 && val.is_finite()) {
                return bad(field, format!("= {val} must be finite and >= 0"));
            }
        }
        for (field, val) in [("m_h", self.m_h), ("omega0", self.omega0), ("omega_c", self.omega_c), ("e_h", self.e_h)] {
            if !(val > 0.0 && val.is_finite()) {
                return bad(field, format!("= {val} must be positive"));
            }
        }
        if !(self.dt0 < self.period() - self.dt_r) {
            return bad("dt0", format!("= {} must be below ΔT - dt_r = {}", self.dt0, self.period() - self.dt_r));
        }
        if !(self.v0 > 0.0 && self.v0 < self.v_h && self.v_h <= self.v) {
            return bad("v0", format!("velocities must satisfy 0 < v0 < v_h <= v (got {}, {}, {})", self.v0, self.v_h, self.v));
        }
        if !(self.t_d < self.dt_f) {
            return bad("t_d", format!("= {} must be below dt_f = {}", self.t_d, self.dt_f));
        }
        if !(self.omega_c < self.omega0) {
            return bad("omega_c", format!("= {} must be below omega0 = {}", self.omega_c, self.omega0));
        }
        Ok(())
    }

    fn check_index(&self, j: usize) -> Result<(), KinematicsError> {
        if j == 0 || j > self.m_r {
            return Err(KinematicsError::CycleIndex { j, m_r: self.m_r });
        }
        Ok(())
    }
}

/// Derived schedule of a validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub config: ScheduleConfig,
    pub trigger_times: Vec<f64>,
    pub decel_times: Vec<f64>,
    pub end_time: f64,
}

impl Schedule {
    pub fn new(config: ScheduleConfig) -> Result<Self, KinematicsError> {
        config.validate()?;
        Ok(Self {
            trigger_times: (1..=config.m_r).map(|i| config.trigger_time(i)).collect(),
            decel_times: (1..=config.m_r).map(|i| config.decel_time(i)).collect(),
            end_time: config.end_time(),
            config,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndPositions {
    /// `R_{2,i}` at the end of the computation, `i = 1..m_r`.
    pub positions: Vec<f64>,
    /// `distances[i][j] = R_{2,i} - R_{2,j}` (0-based indices).
    pub distances: Vec<Vec<f64>>,
}

/// Where each decelerated packet sits when the computation ends.
pub fn end_positions(config: &ScheduleConfig) -> Result<EndPositions, KinematicsError> {
    config.validate()?;
    let t_end = config.end_time();
    let positions: Vec<f64> = (1..=config.m_r)
        .map(|i| config.r2_ref + config.v0 * (t_end - config.decel_time(i) - config.t_d))
        .collect();
    let distances = positions
        .iter()
        .map(|a| positions.iter().map(|b| a - b).collect())
        .collect();
    Ok(EndPositions { positions, distances })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalTimes {
    pub times: Vec<f64>,
    /// `differences[j][i] = T_j - T_i` (0-based).
    pub differences: Vec<Vec<f64>>,
    pub max_difference: f64,
}

/// Arrival times in the left well after the common acceleration.
pub fn arriving_times(config: &ScheduleConfig) -> Result<ArrivalTimes, KinematicsError> {
    config.validate()?;
    let base = config.end_time() + config.t_a;
    let dt = config.period();
    let times: Vec<f64> = (1..=config.m_r)
        .map(|i| base + (config.return_distance + (i as f64 - 1.0) * config.v0 * dt) / config.v)
        .collect();
    let differences = (1..=config.m_r)
        .map(|j| (1..=config.m_r).map(|i| (j as f64 - i as f64) * dt * config.ratio()).collect())
        .collect();
    Ok(ArrivalTimes {
        times,
        differences,
        max_difference: (config.m_r as f64 - 1.0) * dt * config.ratio(),
    })
}

/// `T_j - T_i = (j - i) ΔT v0 / v`.
pub fn arrival_difference(config: &ScheduleConfig, i: usize, j: usize) -> f64 {
    (j as f64 - i as f64) * config.period() * config.ratio()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// No second deceleration; original well frequency.
    One,
    /// Second deceleration and retuned frequency `ω_c`.
    Two,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityPrediction {
    pub probability: f64,
    /// Closed exponential form.
    pub exact: f64,
    /// Second-order series; regime 2 only.
    pub series: Option<f64>,
    pub warning: Option<String>,
}

/// Fraction of the regime-2 phase bound `π/ω_c` the arrival spread may use
/// before the series is considered unreliable.
pub const SERIES_PHASE_FRACTION: f64 = 0.1;

pub fn predicted_fidelity(
    config: &ScheduleConfig,
    j: usize,
    regime: Regime,
) -> Result<FidelityPrediction, KinematicsError> {
    config.validate()?;
    config.check_index(j)?;
    let dt_j1 = arrival_difference(config, 1, j);
    match regime {
        Regime::One => {
            let mean_n = config.e_h / config.omega0;
            let p = amplitude_aj(mean_n, config.omega0, dt_j1).powi(2);
            Ok(FidelityPrediction { probability: p, exact: p, series: None, warning: None })
        }
        Regime::Two => {
            let exact = probability_exact(config.alpha_c_sq, config.omega_c, dt_j1);
            let series = probability_series(config.alpha_c_sq, config.omega_c, config.period(), j, config.ratio());
            let spread = (config.m_r as f64 - 1.0) * config.period() * config.ratio();
            let bound = SERIES_PHASE_FRACTION * std::f64::consts::PI / config.omega_c;
            if spread > bound {
                Ok(FidelityPrediction {
                    probability: exact,
                    exact,
                    series: Some(series),
                    warning: Some(format!(
                        "arrival spread {spread} exceeds {SERIES_PHASE_FRACTION}·π/ω_c = {bound}; using the exponential form"
                    )),
                })
            } else {
                Ok(FidelityPrediction { probability: series, exact, series: Some(series), warning: None })
            }
        }
    }
}

/// Lock fidelity of the rotation-pulse model, `1 - ¼[ω_p (j-1) ΔT v0/v]²`.
pub fn toy_estimate(omega_p: f64, config: &ScheduleConfig, j: usize) -> Result<f64, KinematicsError> {
    config.check_index(j)?;
    let arg = omega_p * (j as f64 - 1.0) * config.period() * config.ratio();
    if arg.abs() >= 1.0 {
        return Err(KinematicsError::OutOfRegime { arg });
    }
    Ok(1.0 - 0.25 * arg * arg)
}

/// Minimum per-step fidelity `1 - ln(p_n)/n` for an `n`-qubit search.
pub fn search_threshold(n: u32, p_n: f64) -> Result<f64, KinematicsError> {
    if n < 1 || !(p_n >= 1.0) {
        return Err(KinematicsError::Threshold { n, p_n });
    }
    Ok(1.0 - p_n.ln() / n as f64)
}

pub fn meets_threshold(fidelity: f64, n: u32, p_n: f64) -> Result<bool, KinematicsError> {
    Ok(fidelity > search_threshold(n, p_n)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ScheduleConfig {
        ScheduleConfig::default()
    }

    #[test]
    fn default_is_valid() {
        cfg().validate().unwrap();
        assert!((cfg().period() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn end_positions_examples() {
        let c = cfg();
        let e = end_positions(&c).unwrap();
        assert_eq!(e.distances[2][2], 0.0);
        let max = e.distances[0][c.m_r - 1];
        assert!((max - c.v0 * (c.m_r as f64 - 1.0) * c.period()).abs() < 1e-12);
        assert!(e.positions.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn arrival_examples() {
        let c = ScheduleConfig { m_r: 5, v0: 0.01 * 1800f64.sqrt(), ..cfg() };
        let a = arriving_times(&c).unwrap();
        assert!((a.differences[1][0] - c.period() * 0.01).abs() < 1e-15);
        assert!(a.times.windows(2).all(|w| w[0] < w[1]));
        // ΔT = 1, ratio 0.01, m_r = 5.
        let unit = ScheduleConfig { dt0: 0.9, dt_f: 0.08, ..c };
        assert!((unit.period() - 1.0).abs() < 1e-12);
        assert!((arriving_times(&unit).unwrap().max_difference - 0.04).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs_name_the_field() {
        let c = ScheduleConfig { t_d: 0.5, ..cfg() };
        assert!(matches!(c.validate(), Err(KinematicsError::Invalid { field: "t_d", .. })));
        let c = ScheduleConfig { v0: 100.0, ..cfg() };
        assert!(matches!(c.validate(), Err(KinematicsError::Invalid { field: "v0", .. })));
        let c = ScheduleConfig { omega_c: 2.0, ..cfg() };
        assert!(matches!(c.validate(), Err(KinematicsError::Invalid { field: "omega_c", .. })));
    }

    #[test]
    fn fidelity_regimes() {
        let c = cfg();
        for regime in [Regime::One, Regime::Two] {
            assert_eq!(predicted_fidelity(&c, 1, regime).unwrap().probability, 1.0);
        }
        let p1 = predicted_fidelity(&c, 3, Regime::One).unwrap();
        let aj = amplitude_aj(c.e_h / c.omega0, c.omega0, arrival_difference(&c, 1, 3));
        assert_eq!(p1.probability, aj * aj);
        let p2 = predicted_fidelity(&c, 3, Regime::Two).unwrap();
        assert!(p2.warning.is_none());
        assert!(p2.probability >= p1.probability);
        let wide = ScheduleConfig { v0: 0.9 * c.v_h, dt_f: 2.0, ..c };
        assert!(predicted_fidelity(&wide, 3, Regime::Two).unwrap().warning.is_some());
    }

    #[test]
    fn toy_and_threshold() {
        let c = cfg();
        assert_eq!(toy_estimate(3.0, &c, 1).unwrap(), 1.0);
        let omega_p = 0.2 / (c.period() * c.ratio());
        assert!((toy_estimate(omega_p, &c, 2).unwrap() - 0.99).abs() < 1e-12);
        assert!(matches!(toy_estimate(100.0, &c, 4), Err(KinematicsError::OutOfRegime { .. })));
        assert_eq!(search_threshold(5, 1.0).unwrap(), 1.0);
        assert!((search_threshold(100, 1e4).unwrap() - 0.907_896_596_280_238_2).abs() < 1e-12);
        assert!(meets_threshold(0.95, 100, 1e4).unwrap());
    }
}
