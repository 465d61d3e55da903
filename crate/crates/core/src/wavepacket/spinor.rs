use super::{Fourier, Grid1D, WaveError};
use crate::C64;

pub const NORM_TOL: f64 = 1e-8;

/// Two internal levels times a motional wavefunction on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorWave {
    pub grid: Grid1D,
    pub mass: f64,
    pub levels: [Vec<C64>; 2],
}

impl SpinorWave {
    pub fn zeros(grid: Grid1D, mass: f64) -> Self {
        let z = vec![C64::new(0.0, 0.0); grid.n];
        Self { grid, mass, levels: [z.clone(), z] }
    }

    pub fn level_norm_sqr(&self, level: usize) -> f64 {
        self.levels[level].iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.level_norm_sqr(0) + self.level_norm_sqr(1)
    }

    /// `<self|other>`, both levels.
    pub fn inner(&self, other: &SpinorWave) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for l in 0..2 {
            acc += self.levels[l].iter().zip(&other.levels[l]).map(|(a, b)| a.conj() * b).sum::<C64>();
        }
        acc * self.grid.dx()
    }

    /// `|<self|other>|²`.
    pub fn overlap(&self, other: &SpinorWave) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn density(&self) -> Vec<f64> {
        self.levels[0].iter().zip(&self.levels[1]).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect()
    }

    pub fn mean_x(&self) -> f64 {
        let dx = self.grid.dx();
        let d = self.density();
        let n: f64 = d.iter().sum::<f64>() * dx;
        d.iter().enumerate().map(|(i, p)| p * self.grid.x(i)).sum::<f64>() * dx / n
    }

    /// Probability in `[lo, hi)`.
    pub fn probability_in(&self, lo: f64, hi: f64) -> f64 {
        let d = self.density();
        d[self.grid.range(lo, hi)].iter().sum::<f64>() * self.grid.dx()
    }

    pub fn is_finite(&self) -> bool {
        self.levels.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_norm(&self) -> Result<(), WaveError> {
        let n = self.norm_sqr();
        if !self.is_finite() || (n - 1.0).abs() > NORM_TOL {
            return Err(WaveError::Drift { what: "norm", value: n - 1.0, budget: NORM_TOL });
        }
        Ok(())
    }
}

/// Normalized Gaussian `exp(-(x-x0)²/(2σ²) + i p0 x)` on one level. The
/// position variance is `σ²/2`, the momentum variance `1/(2σ²)`.
pub fn init_gaussian(
    grid: Grid1D,
    mass: f64,
    x0: f64,
    p0: f64,
    sigma: f64,
    level: usize,
) -> Result<SpinorWave, WaveError> {
    if level > 1 || !(sigma > 0.0) || !(mass > 0.0) {
        return Err(WaveError::Support(format!("level {level}, sigma {sigma}, mass {mass}")));
    }
    if x0 - 5.0 * sigma < grid.x_min || x0 + 5.0 * sigma > grid.x_max {
        return Err(WaveError::Support(format!(
            "packet at {x0} with sigma {sigma} is closer than 5 sigma to [{}, {}]",
            grid.x_min, grid.x_max
        )));
    }
    if sigma < 8.0 * grid.dx() {
        return Err(WaveError::Grid(format!("sigma {sigma} spans fewer than 8 points (dx = {})", grid.dx())));
    }
    let mut w = SpinorWave::zeros(grid, mass);
    for (i, z) in w.levels[level].iter_mut().enumerate() {
        let x = grid.x(i);
        *z = C64::from_polar((-(x - x0).powi(2) / (2.0 * sigma * sigma)).exp(), p0 * x);
    }
    let s = w.norm_sqr().sqrt();
    w.levels[level].iter_mut().for_each(|z| *z /= s);
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub norm: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub energy: f64,
    pub p_left: f64,
    pub p_right: f64,
    /// Position standard deviation.
    pub spread: f64,
    pub level_population: [f64; 2],
    pub overlap: Option<f64>,
}

/// Observables of `wave`. `P_left`/`P_right` split at `split_x`; `overlap`
/// is `|<reference|wave>|²` when a reference is given.
pub fn measure(
    wave: &SpinorWave,
    potential: &[f64],
    split_x: f64,
    reference: Option<&SpinorWave>,
) -> Measurement {
    let mut fourier = Fourier::new(wave.grid.n);
    measure_with(&mut fourier, wave, potential, split_x, reference)
}

pub(crate) fn measure_with(
    fourier: &mut Fourier,
    wave: &SpinorWave,
    potential: &[f64],
    split_x: f64,
    reference: Option<&SpinorWave>,
) -> Measurement {
    let g = wave.grid;
    let dx = g.dx();
    let dens = wave.density();
    let norm: f64 = dens.iter().sum::<f64>() * dx;
    let mut mx = 0.0;
    let mut mx2 = 0.0;
    let mut pot = 0.0;
    let mut left = 0.0;
    for (i, &p) in dens.iter().enumerate() {
        let x = g.x(i);
        mx += p * x;
        mx2 += p * x * x;
        pot += p * potential[i];
        if x < split_x {
            left += p;
        }
    }
    let (mx, mx2, pot, left) = (mx * dx / norm, mx2 * dx / norm, pot * dx, left * dx);
    let ks = g.ks();
    let mut mp = 0.0;
    let mut kin = 0.0;
    let mut spec_norm = 0.0;
    let mut buf = vec![C64::new(0.0, 0.0); g.n];
    for level in &wave.levels {
        buf.copy_from_slice(level);
        fourier.forward(&mut buf);
        for (z, k) in buf.iter().zip(&ks) {
            let w = z.norm_sqr();
            spec_norm += w;
            mp += w * k;
            kin += w * k * k;
        }
    }
    let (mp, kin) = if spec_norm > 0.0 {
        (mp / spec_norm, kin / spec_norm * norm / (2.0 * wave.mass))
    } else {
        (0.0, 0.0)
    };
    Measurement {
        norm,
        mean_x: mx,
        mean_p: mp,
        energy: kin + pot,
        p_left: left,
        p_right: norm - left,
        spread: (mx2 - mx * mx).max(0.0).sqrt(),
        level_population: [wave.level_norm_sqr(0), wave.level_norm_sqr(1)],
        overlap: reference.map(|r| r.overlap(wave)),
    }
}
