use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::WaveError;
use crate::C64;

pub const MIN_POINTS: usize = 256;

/// Uniform periodic grid on `[x_min, x_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self, WaveError> {
        if n < MIN_POINTS || !n.is_power_of_two() {
            return Err(WaveError::Grid(format!("n = {n} must be a power of two >= {MIN_POINTS}")));
        }
        if !(x_max > x_min && x_min.is_finite() && x_max.is_finite()) {
            return Err(WaveError::Grid(format!("empty interval [{x_min}, {x_max})")));
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Wavenumber of FFT bin `i` (standard ordering).
    pub fn k(&self, i: usize) -> f64 {
        let dk = TAU / self.length();
        if i < self.n / 2 {
            i as f64 * dk
        } else {
            (i as f64 - self.n as f64) * dk
        }
    }

    pub fn ks(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.k(i)).collect()
    }

    /// Nyquist wavenumber.
    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI / self.dx()
    }

    /// Largest `dt` with kinetic phase per step below π/4.
    pub fn max_stable_dt(&self, mass: f64) -> f64 {
        std::f64::consts::FRAC_PI_4 / (self.k_max().powi(2) / (2.0 * mass))
    }

    /// Index range of grid points with `lo <= x < hi`.
    pub fn range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let dx = self.dx();
        let first = ((lo - self.x_min) / dx).ceil().clamp(0.0, self.n as f64) as usize;
        let last = ((hi - self.x_min) / dx).ceil().clamp(0.0, self.n as f64) as usize;
        first..last.max(first)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x < self.x_max
    }
}

/// Forward and normalized inverse FFT of one grid size.
#[derive(Clone)]
pub struct Fourier {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
    n: usize,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fourier({})", self.n)
    }
}

impl Fourier {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self { fwd, inv, scratch: vec![C64::new(0.0, 0.0); len], n }
    }

    pub fn forward(&mut self, buf: &mut [C64]) {
        self.fwd.process_with_scratch(buf, &mut self.scratch);
    }

    /// Inverse transform without the `1/n` factor.
    pub fn inverse_raw(&mut self, buf: &mut [C64]) {
        self.inv.process_with_scratch(buf, &mut self.scratch);
    }

    pub fn inverse(&mut self, buf: &mut [C64]) {
        self.inverse_raw(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }
}
