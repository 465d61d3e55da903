use super::spinor::measure_with;
use super::{Fourier, Grid1D, Measurement, SpinorWave, WaveError};
use crate::C64;

/// Strang-split propagator `e^{-iV dt/2} e^{-iT dt} e^{-iV dt/2}` for a fixed
/// potential, grid, mass and step.
#[derive(Debug, Clone)]
pub struct SplitOperator {
    grid: Grid1D,
    mass: f64,
    dt: f64,
    potential: Vec<f64>,
    half_v: Vec<C64>,
    full_v: Vec<C64>,
    /// Kinetic phase with the inverse-FFT `1/n` folded in.
    kinetic: Vec<C64>,
    fourier: Fourier,
    buf: Vec<C64>,
}

impl SplitOperator {
    pub fn new(grid: Grid1D, potential: Vec<f64>, mass: f64, dt: f64) -> Result<Self, WaveError> {
        if potential.len() != grid.n {
            return Err(WaveError::Grid(format!("potential has {} points, grid {}", potential.len(), grid.n)));
        }
        let phase = grid.k_max().powi(2) / (2.0 * mass) * dt;
        if !(dt > 0.0) || phase >= std::f64::consts::FRAC_PI_4 {
            return Err(WaveError::Stability { dt, phase });
        }
        let half_v = potential.iter().map(|v| C64::from_polar(1.0, -0.5 * v * dt)).collect();
        let full_v = potential.iter().map(|v| C64::from_polar(1.0, -v * dt)).collect();
        let scale = 1.0 / grid.n as f64;
        let kinetic = grid
            .ks()
            .into_iter()
            .map(|k| C64::from_polar(scale, -k * k / (2.0 * mass) * dt))
            .collect();
        Ok(Self {
            grid,
            mass,
            dt,
            potential,
            half_v,
            full_v,
            kinetic,
            fourier: Fourier::new(grid.n),
            buf: vec![C64::new(0.0, 0.0); grid.n],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Advance `steps` steps. Empty levels are skipped.
    pub fn step(&mut self, wave: &mut SpinorWave, steps: usize) {
        if steps == 0 {
            return;
        }
        for level in wave.levels.iter_mut() {
            if level.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                continue;
            }
            mul(level, &self.half_v);
            for s in 0..steps {
                self.fourier.forward(level);
                mul(level, &self.kinetic);
                self.fourier.inverse_raw(level);
                mul(level, if s + 1 == steps { &self.half_v } else { &self.full_v });
            }
        }
    }

    pub fn measure(&mut self, wave: &SpinorWave, split_x: f64, reference: Option<&SpinorWave>) -> Measurement {
        measure_with(&mut self.fourier, wave, &self.potential, split_x, reference)
    }

    /// Translate one level by `shift` (exact spectral shift) and boost it by
    /// momentum `boost`. Together this is the harmonic displacement operator.
    pub fn displace(&mut self, wave: &mut SpinorWave, level: usize, shift: f64, boost: f64) {
        let ks = self.grid.ks();
        let scale = 1.0 / self.grid.n as f64;
        let psi = &mut wave.levels[level];
        self.buf.copy_from_slice(psi);
        self.fourier.forward(&mut self.buf);
        for (z, k) in self.buf.iter_mut().zip(&ks) {
            *z *= C64::from_polar(scale, -k * shift);
        }
        self.fourier.inverse_raw(&mut self.buf);
        for (i, (dst, src)) in psi.iter_mut().zip(&self.buf).enumerate() {
            *dst = src * C64::from_polar(1.0, boost * self.grid.x(i));
        }
    }
}

fn mul(a: &mut [C64], b: &[C64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x *= y;
    }
}

/// Evolve a copy of `wave` for `steps` steps of `dt`.
pub fn evolve(wave: &SpinorWave, potential: &[f64], dt: f64, steps: usize) -> Result<SpinorWave, WaveError> {
    let mut prop = SplitOperator::new(wave.grid, potential.to_vec(), wave.mass, dt)?;
    let mut out = wave.clone();
    prop.step(&mut out, steps);
    let drift = (out.norm_sqr() - wave.norm_sqr()).abs();
    let budget = 1e-10 * (steps as f64 / 1e4).max(1.0);
    if !out.is_finite() || drift > budget {
        return Err(WaveError::Drift { what: "norm", value: drift, budget });
    }
    Ok(out)
}
