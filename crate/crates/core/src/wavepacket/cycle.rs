//! One halting cycle of the double-well control unit, simulated end to end:
//! ground packet in the left well, trigger at `t_0i`, flight over the
//! barrier, a decelerating kick train at `t_mi`, slow drift until the
//! computation ends, a common accelerating train, bounce off the right wall
//! and return into the left well.

use rayon::prelude::*;

use super::{apply_kick, build_potential, init_gaussian, kick_train, Grid1D, Measurement, PotentialSpec, SpinorWave, SplitOperator, WaveError};
use crate::kinematics::{arrival_difference, end_positions, ScheduleConfig};

/// Internal level of the halting qubit before the trigger.
pub const GROUND_LEVEL: usize = 0;
/// Level after the trigger swap (`n_h'`).
pub const HALT_LEVEL: usize = 1;
/// Largest norm fraction allowed outside a kick window.
pub const KICK_LEAK: f64 = 1e-3;
/// Smallest right-well population while the packet is locked.
pub const LOCKED_RIGHT: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct CycleSetup {
    pub schedule: ScheduleConfig,
    pub potential: PotentialSpec,
    pub grid: Grid1D,
    pub dt: f64,
    pub decel_kicks: usize,
    pub accel_kicks: usize,
    /// Displacement of the packet from the well centre created by the trigger.
    pub trigger_offset: f64,
    /// Common end time of every cycle run; overlaps are taken here.
    pub t_final: f64,
    /// Trajectory sampling stride in steps.
    pub sample_every: usize,
}

impl CycleSetup {
    /// Default geometry in units ħ = m_h = ω0 = 1: barrier `V0 = 45`, `a = 0.9`
    /// (`βa ≈ 8.5` for the ground packet), `E_h = 900 = 20 V0`, four cycles of
    /// `ΔT = 0.29`, and `v0 = ratio · v`.
    pub fn standard(ratio: f64) -> Result<Self, WaveError> {
        let e_h: f64 = 900.0;
        let v = (2.0 * e_h).sqrt();
        let schedule = ScheduleConfig {
            m_r: 4,
            dt_b: 0.01,
            dt_h: 0.01,
            dt_h2: 0.01,
            dt_r: 0.01,
            dt0: 0.2,
            dt_f: 0.05,
            t_d: 0.01,
            t_a: 0.01,
            v_h: v,
            v0: ratio * v,
            v,
            omega0: 1.0,
            omega_c: 0.25,
            e_h,
            m_h: 1.0,
            r2_ref: 0.0,
            spread: 1.0 / std::f64::consts::SQRT_2,
            alpha_c_sq: 1.0,
            return_distance: 0.0,
        };
        let potential = PotentialSpec { k_spring: 1.0, center: 0.0, v0: 45.0, a: 0.9, floor_length: 25.0, left_extent: 14.0 };
        let grid = Grid1D::new(-16.0, 40.0, 2048)?;
        let per_cycle = (schedule.period() / 1e-4).round();
        let mut setup = Self {
            schedule,
            potential,
            grid,
            dt: schedule.period() / per_cycle,
            decel_kicks: 4,
            accel_kicks: 4,
            trigger_offset: 8.5,
            t_final: 0.0,
            sample_every: 50,
        };
        setup.fill_reference_kinematics()?;
        Ok(setup)
    }

    /// Set `r2_ref`, `return_distance` and `t_final` from the classical
    /// trajectory of the packet centre.
    pub fn fill_reference_kinematics(&mut self) -> Result<(), WaveError> {
        let c = &mut self.schedule;
        c.r2_ref = classical_decel_end(&self.potential, c, self.trigger_offset, self.decel_kicks)?;
        c.return_distance = 0.0;
        let r21 = end_positions(c).map_err(WaveError::Kinematics)?.positions[0];
        let wall = self.potential.right_wall();
        c.return_distance = (wall - r21) + (wall - self.potential.center);
        self.t_final = c.end_time()
            + c.t_a
            + c.return_distance / c.v
            + (c.m_r as f64 - 1.0) * c.period() * c.ratio()
            + 0.1;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), WaveError> {
        let c = &self.schedule;
        c.validate().map_err(WaveError::Kinematics)?;
        self.potential.validate()?;
        let bad = |m: String| Err(WaveError::Schedule(m));
        let k_expected = c.m_h * c.omega0 * c.omega0;
        if (self.potential.k_spring - k_expected).abs() > 1e-9 * k_expected {
            return bad(format!("K = {} but m_h ω0² = {k_expected}", self.potential.k_spring));
        }
        let v_floor = (2.0 * c.e_h / c.m_h).sqrt();
        if (c.v_h - v_floor).abs() > 1e-9 * v_floor {
            return bad(format!("v_h = {} but sqrt(2 E_h / m_h) = {v_floor}", c.v_h));
        }
        if c.e_h < 2.0 * self.potential.v0 {
            return bad(format!("E_h = {} is not well above V0 = {}", c.e_h, self.potential.v0));
        }
        let d = self.trigger_offset;
        if !(d >= 0.0 && d < self.potential.flank_width()) {
            return bad(format!("trigger offset {d} outside the left well"));
        }
        if !(self.dt > 0.0) || self.decel_kicks == 0 || self.accel_kicks == 0 || self.sample_every == 0 {
            return bad("dt, kick counts and sample stride must be positive".into());
        }
        if !(self.t_final > c.end_time() + c.t_a) {
            return bad(format!("t_final = {} before the acceleration ends", self.t_final));
        }
        Ok(())
    }

    pub fn steps(&self, t: f64) -> usize {
        (t / self.dt).round() as usize
    }

    fn trigger_momentum(&self) -> f64 {
        let c = &self.schedule;
        let d = self.trigger_offset;
        (2.0 * c.m_h * (c.e_h - 0.5 * self.potential.k_spring * d * d)).sqrt()
    }
}

/// Classical centre position at `t_mi + T_D` for the trigger offset and kick count.
fn classical_decel_end(spec: &PotentialSpec, c: &ScheduleConfig, offset: f64, kicks: usize) -> Result<f64, WaveError> {
    let omega = spec.omega0(c.m_h);
    let amp = (2.0 * c.e_h / c.m_h).sqrt() / omega;
    let d0 = spec.flank_width();
    if !(amp > d0) {
        return Err(WaveError::Schedule(format!("E_h = {} cannot clear the barrier V0 = {}", c.e_h, spec.v0)));
    }
    let t_flank = ((d0 / amp).asin() - (offset / amp).asin()) / omega;
    let t_barrier = spec.a / (2.0 * (c.e_h - spec.v0) / c.m_h).sqrt();
    let t_floor = c.dt0 - t_flank - t_barrier;
    if t_floor <= 0.0 {
        return Err(WaveError::Schedule(format!("dt0 = {} ends before the packet leaves the barrier", c.dt0)));
    }
    let mut x = spec.barrier_end() + c.v_h * t_floor;
    if kicks > 1 {
        let h = c.t_d / (kicks as f64 - 1.0);
        let dv = (c.v_h - c.v0) / kicks as f64;
        for s in 1..kicks {
            x += (c.v_h - s as f64 * dv) * h;
        }
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Start,
    Trigger,
    DecelStart,
    DecelEnd,
    /// End of the computation, before the accelerating train.
    Locked,
    AccelEnd,
    Arrival,
    Final,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub stage: Stage,
    pub t: f64,
    pub measurement: Measurement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub p_left: f64,
    pub p_right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    pub trigger_time: f64,
    pub decel_time: f64,
    /// `<x>` at the end of the computation.
    pub locked_position: f64,
    pub locked_spread: f64,
    /// First leftward crossing of the well centre after the acceleration.
    pub arrival_time: f64,
    /// Time of the turning point at the right wall.
    pub bounce_time: f64,
    pub final_time: f64,
    pub stages: Vec<StageRecord>,
    pub samples: Vec<TrajectorySample>,
    pub final_wave: SpinorWave,
    /// `|<ψ_ref|ψ_i>|²` at `final_time`; filled by [`run_cycles`].
    pub final_overlap: Option<f64>,
}

impl CycleRecord {
    pub fn stage(&self, stage: Stage) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == stage)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    Trigger,
    Decel(usize),
    Accel(usize),
    Final,
}

/// Simulate the control unit for trigger cycle `i`.
pub fn run_halting_cycle(setup: &CycleSetup, i: usize) -> Result<CycleRecord, WaveError> {
    setup.validate()?;
    let c = &setup.schedule;
    if i == 0 || i > c.m_r {
        return Err(WaveError::Kinematics(crate::kinematics::KinematicsError::CycleIndex { j: i, m_r: c.m_r }));
    }
    let spec = &setup.potential;
    let mass = c.m_h;
    let split = spec.barrier_center();
    let window = spec.right_window();
    let pot = build_potential(spec, &setup.grid)?;
    let mut prop = SplitOperator::new(setup.grid, pot, mass, setup.dt)?;
    let sigma0 = 1.0 / (mass * spec.omega0(mass)).sqrt();
    let mut wave = init_gaussian(setup.grid, mass, spec.center, 0.0, sigma0, GROUND_LEVEL)?;

    let decel = kick_train(-mass * (c.v_h - c.v0), setup.decel_kicks, HALT_LEVEL, window);
    let accel = kick_train(mass * (c.v - c.v0), setup.accel_kicks, HALT_LEVEL, window);
    let spacing = |span: f64, n: usize| if n > 1 { span / (n as f64 - 1.0) } else { 0.0 };
    let mut events = vec![(setup.steps(c.trigger_time(i)), Event::Trigger)];
    for s in 0..decel.len() {
        events.push((setup.steps(c.decel_time(i) + s as f64 * spacing(c.t_d, decel.len())), Event::Decel(s)));
    }
    for s in 0..accel.len() {
        events.push((setup.steps(c.end_time() + s as f64 * spacing(c.t_a, accel.len())), Event::Accel(s)));
    }
    events.push((setup.steps(setup.t_final), Event::Final));
    events.sort_by_key(|e| e.0);

    let accel_done = events.iter().filter(|e| matches!(e.1, Event::Accel(_))).map(|e| e.0).max().unwrap_or(0);
    let mut stages = vec![StageRecord { stage: Stage::Start, t: 0.0, measurement: prop.measure(&wave, split, None) }];
    let mut samples = Vec::new();
    let mut step = 0usize;
    let mut prev_x = wave.mean_x();
    let mut arrival = None;
    let mut bounce = (f64::NEG_INFINITY, 0.0);
    let mut locked = (0.0, 0.0);
    let time = |s: usize| s as f64 * setup.dt;

    for (at, event) in events {
        while step < at {
            prop.step(&mut wave, 1);
            step += 1;
            if step % setup.sample_every == 0 {
                let m = prop.measure(&wave, split, None);
                samples.push(TrajectorySample { t: time(step), mean_x: m.mean_x, mean_p: m.mean_p, p_left: m.p_left, p_right: m.p_right });
            }
            if step > accel_done {
                let x = wave.mean_x();
                if x > bounce.0 && arrival.is_none() {
                    bounce = (x, time(step));
                }
                if arrival.is_none() && prev_x > spec.center && x <= spec.center {
                    let t = time(step - 1) + (prev_x - spec.center) / (prev_x - x) * setup.dt;
                    arrival = Some(t);
                    stages.push(StageRecord { stage: Stage::Arrival, t, measurement: prop.measure(&wave, split, None) });
                }
                prev_x = x;
            }
        }
        match event {
            Event::Trigger => {
                let shift = setup.trigger_offset;
                prop.displace(&mut wave, GROUND_LEVEL, shift, setup.trigger_momentum());
                wave.levels.swap(GROUND_LEVEL, HALT_LEVEL);
                stages.push(StageRecord { stage: Stage::Trigger, t: time(step), measurement: prop.measure(&wave, split, None) });
            }
            Event::Decel(s) | Event::Accel(s) => {
                let is_decel = matches!(event, Event::Decel(_));
                let train = if is_decel { &decel } else { &accel };
                let inside = wave.probability_in(window.0, window.1) / wave.norm_sqr();
                let label = if is_decel { Stage::DecelStart } else { Stage::Locked };
                if 1.0 - inside > KICK_LEAK {
                    return Err(WaveError::Leakage { stage: format!("{label:?} kick {s}"), outside: 1.0 - inside });
                }
                if s == 0 {
                    let m = prop.measure(&wave, split, None);
                    if !is_decel {
                        if m.p_right < LOCKED_RIGHT {
                            return Err(WaveError::Leakage { stage: "locked".into(), outside: m.p_left });
                        }
                        locked = (m.mean_x, m.spread);
                    }
                    stages.push(StageRecord { stage: label, t: time(step), measurement: m });
                }
                apply_kick(&mut wave, &train[s])?;
                if s + 1 == train.len() {
                    let stage = if is_decel { Stage::DecelEnd } else { Stage::AccelEnd };
                    stages.push(StageRecord { stage, t: time(step), measurement: prop.measure(&wave, split, None) });
                    if !is_decel {
                        prev_x = wave.mean_x();
                    }
                }
            }
            Event::Final => {
                stages.push(StageRecord { stage: Stage::Final, t: time(step), measurement: prop.measure(&wave, split, None) });
            }
        }
    }
    wave.check_norm()?;
    let arrival_time = arrival.ok_or_else(|| WaveError::Schedule(format!("cycle {i}: no arrival before t_final = {}", setup.t_final)))?;
    Ok(CycleRecord {
        cycle: i,
        trigger_time: c.trigger_time(i),
        decel_time: c.decel_time(i),
        locked_position: locked.0,
        locked_spread: locked.1,
        arrival_time,
        bounce_time: bounce.1,
        final_time: time(step),
        stages,
        samples,
        final_wave: wave,
        final_overlap: None,
    })
}

/// Run several trigger cycles in parallel and fill `final_overlap` against
/// the first listed cycle. Records come back in input order.
pub fn run_cycles(setup: &CycleSetup, cycles: &[usize]) -> Result<Vec<CycleRecord>, WaveError> {
    let mut records = cycles
        .par_iter()
        .map(|&i| run_halting_cycle(setup, i))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(reference) = records.first().map(|r| r.final_wave.clone()) {
        for r in &mut records {
            r.final_overlap = Some(reference.overlap(&r.final_wave));
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalRow {
    pub i: usize,
    pub j: usize,
    pub t_i: f64,
    pub analytic: f64,
    pub measured: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    pub records: Vec<CycleRecord>,
    /// Rows for every pair `i < j`.
    pub rows: Vec<ArrivalRow>,
    pub max_relative_error: f64,
    /// `R_{2,m_r} < … < R_{2,1}` in the simulation.
    pub positions_descending: bool,
    /// `T_1 < … < T_{m_r}` in the simulation.
    pub arrivals_ascending: bool,
}

/// Simulate every trigger cycle and compare measured arrival-time
/// differences with `(j - i) ΔT v0 / v`.
pub fn kinematics_cross_check(setup: &CycleSetup) -> Result<CrossCheck, WaveError> {
    let cycles: Vec<usize> = (1..=setup.schedule.m_r).collect();
    let records = run_cycles(setup, &cycles)?;
    let mut rows = Vec::new();
    let mut max_err: f64 = 0.0;
    for a in &records {
        for b in records.iter().filter(|b| b.cycle > a.cycle) {
            let analytic = arrival_difference(&setup.schedule, a.cycle, b.cycle);
            let measured = b.arrival_time - a.arrival_time;
            max_err = max_err.max(((measured - analytic) / analytic).abs());
            rows.push(ArrivalRow { i: a.cycle, j: b.cycle, t_i: a.arrival_time, analytic, measured });
        }
    }
    let positions_descending = records.windows(2).all(|w| w[1].locked_position < w[0].locked_position);
    let arrivals_ascending = records.windows(2).all(|w| w[0].arrival_time < w[1].arrival_time);
    Ok(CrossCheck { records, rows, max_relative_error: max_err, positions_descending, arrivals_ascending })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeficitPoint {
    pub ratio: f64,
    pub cycle: usize,
    /// `1 - |<ψ_1|ψ_j>|²`.
    pub deficit: f64,
    /// Free-drift oracle: shift `v0 τ` and spreading over `τ = (j-1) ΔT`
    /// for the ground-width momentum distribution.
    pub gaussian_estimate: f64,
}

/// Final-overlap deficit of cycle `j` against cycle 1 for each ratio `v0/v`.
pub fn overlap_deficits(ratios: &[f64], j: usize) -> Result<Vec<DeficitPoint>, WaveError> {
    ratios
        .par_iter()
        .map(|&ratio| {
            let setup = CycleSetup::standard(ratio)?;
            let recs = run_cycles(&setup, &[1, j])?;
            let c = &setup.schedule;
            let tau = (j as f64 - 1.0) * c.period();
            // Ground-packet momentum variance m ω0 / 2; the extra drift τ
            // acts as e^{-i p² τ / 2m} around the drift momentum m v0.
            let s2 = 0.5 * c.m_h * c.omega0;
            let g = 1.0 + (s2 * tau / c.m_h).powi(2);
            let estimate = 1.0 - g.powf(-0.5) * (-(c.v0 * tau).powi(2) * s2 / g).exp();
            Ok(DeficitPoint {
                ratio,
                cycle: j,
                deficit: 1.0 - recs[1].final_overlap.unwrap_or(0.0),
                gaussian_estimate: estimate,
            })
        })
        .collect()
}
