//! Experiment orchestration. Sweep points run in parallel and are collected
//! in input order, so output never depends on scheduling.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use unihalt_core::kinematics::{predicted_fidelity, Regime};
use unihalt_core::oscillator::{probability_series, squeeze_amplitude, squeeze_amplitude_numeric, DEFAULT_TAIL_TOL};
use unihalt_core::protocol::run_program;
use unihalt_core::wavepacket::{
    kinematics_cross_check, least_squares_slope, run_cycles, transmission_with,
    CycleSetup, ScatterPlan, Stage,
};
use unihalt_core::{
    build_subspace, CompositeSpace, GroupFactorization, LockModel, ScheduleConfig, SubspaceKind, Variant, C64,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, ConfigError};
use crate::output::{self, Cell, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub tables: Vec<Table>,
    /// Human-readable notes for the console.
    pub notes: Vec<String>,
    pub files: Vec<PathBuf>,
}

/// Compute the experiment's tables and write them under `config.output`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary, CliError> {
    let (tables, notes) = compute(config)?;
    let files = tables.iter().map(|t| t.write(&config.output)).collect::<Result<Vec<_>, _>>()?;
    Ok(RunSummary { tables, notes, files })
}

/// Compute without touching the filesystem.
pub fn compute(config: &ExperimentConfig) -> Result<(Vec<Table>, Vec<String>), CliError> {
    if config.threads == 0 {
        return dispatch(config);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| ConfigError::invalid("threads", config.threads, e))?;
    pool.install(|| dispatch(config))
}

fn dispatch(config: &ExperimentConfig) -> Result<(Vec<Table>, Vec<String>), CliError> {
    match config.experiment {
        Experiment::Protocol => protocol(config),
        Experiment::Fidelity => fidelity(config),
        Experiment::Scatter => scatter(config),
        Experiment::Squeeze => squeeze(config),
        Experiment::Kinematics => kinematics(config),
        Experiment::FullCycle => full_cycle(config),
    }
}

fn protocol(config: &ExperimentConfig) -> Result<(Vec<Table>, Vec<String>), CliError> {
    let p: u64 = config.get("p")?;
    let g = GroupFactorization::new(p).map_err(|e| ConfigError::invalid("p", p, e))?;
    let k = match config.raw("k")? {
        "max" => g.r(),
        _ => config.get("k")?,
    };
    let kind = match config.raw("kind")? {
        "multiplicative" => SubspaceKind::Multiplicative,
        "additive" => SubspaceKind::Additive,
        other => return Err(ConfigError::invalid("kind", other, "expected multiplicative or additive").into()),
    };
    let variant = match config.raw("variant")? {
        "qc" => Variant::Qc,
        "qh" => Variant::Qh,
        other => return Err(ConfigError::invalid("variant", other, "expected qc or qh").into()),
    };
    let lock = match config.raw("lock")? {
        "ideal" => LockModel::Ideal,
        "rotation" => {
            let eps = config.f64("epsilon")?;
            if !(0.0..=1.0).contains(&eps) {
                return Err(ConfigError::invalid("epsilon", eps, "must lie in [0, 1]").into());
            }
            LockModel::rotation_pulse(eps)
        }
        other => return Err(ConfigError::invalid("lock", other, "expected ideal or rotation").into()),
    };
    let sub = build_subspace(&g, k, kind).map_err(|e| ConfigError::invalid("k", k, e))?;
    let space = CompositeSpace::new(variant, sub)?;
    let runs = (0..space.m())
        .into_par_iter()
        .map(|x0| run_program(&space, x0, &lock))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new("protocol", output::PROTOCOL);
    for (x0, run) in runs.iter().enumerate() {
        t.push(vec![
            x0.into(),
            run.trigger_cycle.map_or(Cell::Text(String::new()), Cell::from),
            run.output.level.to_string().into(),
            run.output.branch.into(),
            space.symbol_name(run.output.symbol).into(),
            run.output.probability.into(),
        ]);
    }
    let notes = vec![format!("p = {p}, m = {}, {} inputs, lock {}", space.m(), runs.len(), config.raw("lock")?)];
    Ok((vec![t], notes))
}

fn schedule(config: &ExperimentConfig, ratio: f64) -> Result<ScheduleConfig, CliError> {
    let v = config.f64("v")?;
    Ok(ScheduleConfig {
        m_r: config.get("m_r")?,
        dt_b: config.f64("dt_b")?,
        dt_h: config.f64("dt_h")?,
        dt_h2: config.f64("dt_h2")?,
        dt_r: config.f64("dt_r")?,
        dt0: config.f64("dt0")?,
        dt_f: config.f64("dt_f")?,
        t_d: config.f64("t_d")?,
        t_a: config.f64("t_a")?,
        v_h: v,
        v,
        v0: ratio * v,
        omega0: config.f64("omega0")?,
        omega_c: config.f64("omega_c")?,
        e_h: config.f64("e_h")?,
        alpha_c_sq: config.f64("alpha_c_sq")?,
        ..ScheduleConfig::default()
    })
}

fn fidelity(config: &ExperimentConfig) -> Result<(Vec<Table>, Vec<String>), CliError> {
    let ratios: Vec<f64> = config.list("ratios")?;
    let m_r: usize = config.get("m_r")?;
    let cycles: Vec<usize> = match config.raw("cycles")? {
        "last" => vec![m_r],
        "all" => (1..=m_r).collect(),
        _ => config.list("cycles")?,
    };
    let regimes = match config.raw("regime")? {
        "one" => vec![Regime::One],
        "two" => vec![Regime::Two],
        "both" => vec![Regime::One, Regime::Two],
        other => return Err(ConfigError::invalid("regime", other, "expected one, two or both").into()),
    };
    let mut points = Vec::new();
    for &ratio in &ratios {
        for &j in &cycles {
            for &regime in &regimes {
                points.push((ratio, j, regime));
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|&(ratio, j, regime)| -> Result<_, CliError> {
            let c = schedule(config, ratio)?;
            let pred = predicted_fidelity(&c, j, regime)?;
            let series = match pred.series {
                Some(s) => s,
                None => probability_series(c.e_h / c.omega0, c.omega0, c.period(), j, c.ratio()),
            };
            Ok((ratio, j, regime, pred.exact, series, pred.warning))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new("fidelity", output::FIDELITY);
    let mut notes = Vec::new();
    for (ratio, j, regime, exact, series, warning) in rows {
        let name = match regime {
            Regime::One => "one",
            Regime::Two => "two",
        };
        t.push(vec![j.into(), ratio.into(), name.into(), exact.into(), series.into()]);
        notes.extend(warning);
    }
    notes.push(format!("{} rows", t.rows.len()));
    Ok((vec![t], notes))
}

fn scatter(config: &ExperimentConfig) -> Result<(Vec<Table>, Vec<String>), CliError> {
    let (e, v0, mass) = (config.f64("E")?, config.f64("V0")?, config.f64("mass")?);
    let n: usize = config.get("n")?;
    let mut widths: Vec<f64> = config.list("a")?;
    let beta_a: Vec<f64> = config.list("beta_a")?;
    if !beta_a.is_empty() {
        if !(e < v0) {
            return Err(ConfigError::invalid("beta_a", config.raw("beta_a")?, "needs E < V0").into());
        }
        let beta = (2.0 * mass * (v0 - e)).sqrt();
        widths.extend(beta_a.iter().map(|ba| ba / beta));
    }
    if let Some(bad) = widths.iter().find(|a| !(**a > 0.0)) {
        return Err(ConfigError::invalid("a", bad, "widths must be positive").into());
    }
    let mut t = Table::new("scatter", output::SCATTER);
    if widths.is_empty() {
        return Ok((vec![t], vec!["empty sweep".into()]));
    }
    let a_max = widths.iter().cloned().fold(0.0, f64::max);
    let plan = ScatterPlan::new(e, v0, a_max, mass, n)?;
    let points = widths
        .par_iter()
        .map(|&a| transmission_with(&plan, e, v0, a, mass))
        .collect::<Result<Vec<_>, _>>()?;
    for p in &points {
        t.push(vec![p.a.into(), e.into(), v0.into(), p.t_numeric.into(), p.t_analytic.into()]);
    }
    let mut notes = vec![format!("{} widths on {} points, dt = {:.3e}", points.len(), n, plan.dt)];
    if e < v0 && points.len() >= 2 {
        let xs: Vec<f64> = points.iter().map(|p| p.a).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.t_numeric.ln()).collect();
        let expected = -2.0 * (2.0 * mass * (v0 - e)).sqrt();
        notes.push(format!("fitted d ln T / da = {:.6}, -2 beta = {:.6}", least_squares_slope(&xs, &ys), expected));
    }
    Ok((vec![t], notes))
}

fn squeeze(config: &ExperimentConfig) -> Result<(Vec<Table>, Vec<String>), CliError> {
    let samples: usize = config.get("samples")?;
    let r_max = config.f64("r_max")?;
    let alpha_max = config.f64("alpha_max")?;
    if !(r_max >= 0.0) {
        return Err(ConfigError::invalid("r_max", r_max, "must be >= 0").into());
    }
    if !(alpha_max >= 0.0) {
        return Err(ConfigError::invalid("alpha_max", alpha_max, "must be >= 0").into());
    }
    // Draw every sample up front so the stream is independent of threading.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let draws: Vec<(f64, f64, C64)> = (0..samples)
        .map(|_| {
            let r = r_max * rng.random::<f64>();
            let phi = std::f64::consts::TAU * rng.random::<f64>();
            let alpha = C64::from_polar(alpha_max * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>());
            (r, phi, alpha)
        })
        .collect();
    let rows = draws
        .par_iter()
        .map(|&(r, phi, alpha)| {
            let z = C64::from_polar(r, phi);
            let analytic = squeeze_amplitude(alpha, alpha, z);
            squeeze_amplitude_numeric(alpha, alpha, z, DEFAULT_TAIL_TOL).map(|num| (r, phi, alpha, analytic, num))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new("squeeze", output::SQUEEZE);
    let mut worst: f64 = 0.0;
    for (r, phi, alpha, analytic, num) in rows {
        let err = (analytic - num).norm();
        worst = worst.max(err);
        t.push(vec![
            r.into(),
            phi.into(),
            alpha.re.into(),
            alpha.im.into(),
            analytic.re.into(),
            analytic.im.into(),
            err.into(),
        ]);
    }
    Ok((vec![t], vec![format!("{samples} samples, max |analytic - numeric| = {worst:.3e}")]))
}

fn standard_setup(config: &ExperimentConfig) -> Result<CycleSetup, CliError> {
    let ratio = config.f64("ratio")?;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(ConfigError::invalid("ratio", ratio, "v0/v must lie in (0, 1)").into());
    }
    Ok(CycleSetup::standard(ratio)?)
}

fn kinematics(config: &ExperimentConfig) -> Result<(Vec<Table>, Vec<String>), CliError> {
    let setup = standard_setup(config)?;
    let cc = kinematics_cross_check(&setup)?;
    let mut t = Table::new("kinematics", output::KINEMATICS);
    for r in &cc.rows {
        t.push(vec![r.i.into(), r.j.into(), r.t_i.into(), r.analytic.into(), r.measured.into()]);
    }
    let notes = vec![format!(
        "max relative error {:.4}%, positions descending {}, arrivals ascending {}",
        100.0 * cc.max_relative_error,
        cc.positions_descending,
        cc.arrivals_ascending
    )];
    Ok((vec![t], notes))
}

fn full_cycle(config: &ExperimentConfig) -> Result<(Vec<Table>, Vec<String>), CliError> {
    let mut setup = standard_setup(config)?;
    let every: usize = config.get("sample_every")?;
    if every > 0 {
        setup.sample_every = every;
    }
    let cycles: Vec<usize> = config.list("cycles")?;
    if let Some(bad) = cycles.iter().find(|&&c| c == 0 || c > setup.schedule.m_r) {
        return Err(ConfigError::invalid("cycles", bad, format!("cycles run 1..={}", setup.schedule.m_r)).into());
    }
    let mut full = Table::new("full_cycle", output::FULL_CYCLE);
    let mut traj = Table::new("trajectory", output::TRAJECTORY);
    if cycles.is_empty() {
        return Ok((vec![full, traj], vec!["empty sweep".into()]));
    }
    let records = run_cycles(&setup, &cycles)?;
    for r in &records {
        let locked = r.stage(Stage::Locked).map_or(f64::NAN, |s| s.measurement.p_right);
        full.push(vec![
            r.cycle.into(),
            r.trigger_time.into(),
            r.decel_time.into(),
            r.locked_position.into(),
            r.locked_spread.into(),
            locked.into(),
            r.bounce_time.into(),
            r.arrival_time.into(),
            r.final_time.into(),
            r.final_overlap.unwrap_or(f64::NAN).into(),
        ]);
        for s in &r.samples {
            traj.push(vec![r.cycle.into(), s.t.into(), s.mean_x.into(), s.mean_p.into(), s.p_left.into(), s.p_right.into()]);
        }
    }
    let notes = vec![format!("{} cycles, overlaps against cycle {}", records.len(), cycles[0])];
    Ok((vec![full, traj], notes))
}
