use rayon::prelude::*;

use super::potential::{barrier_potential, PAD_FACTOR};
use super::{init_gaussian, Grid1D, SplitOperator, WaveError};

pub const SCAN_POINTS: usize = 4096;

/// Stationary transmission of a square barrier (ħ = 1).
pub fn square_barrier_transmission(energy: f64, v0: f64, a: f64, mass: f64) -> f64 {
    if v0 == 0.0 || a == 0.0 {
        return 1.0;
    }
    let d = energy - v0;
    if d.abs() < 1e-12 * v0.abs().max(energy) {
        return 1.0 / (1.0 + mass * v0 * a * a / 2.0);
    }
    let q = (2.0 * mass * d.abs()).sqrt() * a;
    let s = if d < 0.0 { q.sinh() } else { q.sin() };
    1.0 / (1.0 + v0 * v0 * s * s / (4.0 * energy * d.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPlan {
    pub grid: Grid1D,
    pub dt: f64,
    pub steps: usize,
    pub k0: f64,
    /// Momentum standard deviation of the incident packet.
    pub sigma_k: f64,
    pub x_start: f64,
    pub barrier_start: f64,
}

impl ScatterPlan {
    /// Size a quasi-monochromatic packet and a box that keeps the reflected
    /// and transmitted parts away from the pads, for barriers up to `a_max`.
    pub fn new(energy: f64, v0: f64, a_max: f64, mass: f64, n: usize) -> Result<Self, WaveError> {
        if !(energy > 0.0 && v0 >= 0.0 && a_max >= 0.0 && mass > 0.0) {
            return Err(WaveError::Bandwidth(format!("need E > 0, V0 >= 0, a >= 0 (E = {energy}, V0 = {v0}, a = {a_max})")));
        }
        let k0 = (2.0 * mass * energy).sqrt();
        let k_top = (2.0 * mass * v0).sqrt();
        let gap = (k_top - k0).abs();
        let sigma_k = if v0 > 0.0 && gap > 0.0 { (k0 / 10.0).min(gap / 12.0) } else { k0 / 10.0 };
        let std_x = 0.5 / sigma_k;
        let x_start = -(7.0 * std_x + 2.0);
        let v_slow = (k0 - 6.0 * sigma_k) / mass;
        let v_fast = (k0 + 6.0 * sigma_k) / mass;
        let t_run = (14.0 * std_x + a_max + 4.0) / v_slow;
        let reach = (x_start + 7.0 * std_x + v_fast * t_run).max(a_max + 7.0 * std_x);
        let half = reach / 0.96;
        let grid = Grid1D::new(-half, half, n)?;
        let dx = grid.dx();
        let beta = (2.0 * mass * (v0 - energy)).max(0.0).sqrt();
        let sigma = std::f64::consts::SQRT_2 * std_x;
        if grid.k_max() < 3.0 * (k0 + 8.0 * sigma_k) || beta * dx > 0.5 || sigma < 8.0 * dx || a_max < dx && a_max > 0.0 {
            return Err(WaveError::Bandwidth(format!(
                "{n} points over {:.1} give dx = {dx:.3}, too coarse for k0 = {k0:.3}, beta = {beta:.3}, a = {a_max}",
                grid.length()
            )));
        }
        let dt = 0.8 * grid.max_stable_dt(mass);
        let steps = (t_run / dt).ceil() as usize;
        let i0 = (-grid.x_min / dx).round() as usize;
        Ok(Self { grid, dt, steps, k0, sigma_k, x_start, barrier_start: grid.x(i0) - 0.5 * dx })
    }

    /// Barrier width realized on the grid.
    pub fn snapped_width(&self, a: f64) -> f64 {
        (a / self.grid.dx()).round() * self.grid.dx()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    pub energy: f64,
    pub v0: f64,
    /// Grid-snapped barrier width.
    pub a: f64,
    pub t_numeric: f64,
    pub t_analytic: f64,
}

pub fn transmission_with(plan: &ScatterPlan, energy: f64, v0: f64, a: f64, mass: f64) -> Result<Transmission, WaveError> {
    let a_eff = plan.snapped_width(a);
    let g = plan.grid;
    let pad = PAD_FACTOR * v0.max(energy);
    let pot = barrier_potential(&g, v0, plan.barrier_start, a_eff, pad, 0.02 * g.length());
    let sigma = 1.0 / (plan.sigma_k * std::f64::consts::SQRT_2);
    let mut wave = init_gaussian(g, mass, plan.x_start, plan.k0, sigma, 0)?;
    let mut prop = SplitOperator::new(g, pot, mass, plan.dt)?;
    prop.step(&mut wave, plan.steps);
    wave.check_norm()?;
    Ok(Transmission {
        energy,
        v0,
        a: a_eff,
        t_numeric: wave.probability_in(plan.barrier_start + a_eff, g.x_max),
        t_analytic: square_barrier_transmission(energy, v0, a_eff, mass),
    })
}

/// Transmitted probability of a quasi-monochromatic packet at mean energy `energy`.
pub fn transmission_scan(energy: f64, v0: f64, a: f64, mass: f64) -> Result<Transmission, WaveError> {
    let plan = ScatterPlan::new(energy, v0, a, mass, SCAN_POINTS)?;
    transmission_with(&plan, energy, v0, a, mass)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub points: Vec<Transmission>,
    /// Least-squares `d ln T / da`.
    pub slope: f64,
    /// `-2β`.
    pub expected: f64,
    pub relative_error: f64,
}

/// Fit `ln T` against `a` for the barrier widths `βa ∈ beta_a` on one grid.
pub fn tunneling_slope(energy: f64, v0: f64, mass: f64, beta_a: &[f64], n: usize) -> Result<SlopeFit, WaveError> {
    if !(energy < v0) || beta_a.len() < 2 {
        return Err(WaveError::Bandwidth(format!("tunneling fit needs E < V0 and two widths (E = {energy}, V0 = {v0})")));
    }
    let beta = (2.0 * mass * (v0 - energy)).sqrt();
    let a_max = beta_a.iter().cloned().fold(0.0, f64::max) / beta;
    let plan = ScatterPlan::new(energy, v0, a_max, mass, n)?;
    let points = beta_a
        .par_iter()
        .map(|ba| transmission_with(&plan, energy, v0, ba / beta, mass))
        .collect::<Result<Vec<_>, _>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.a).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.t_numeric.ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    let expected = -2.0 * beta;
    Ok(SlopeFit { points, slope, expected, relative_error: ((slope - expected) / expected).abs() })
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
