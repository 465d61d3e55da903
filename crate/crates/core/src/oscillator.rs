//! Coherent states of the control oscillator, their overlaps, and the
//! two-photon (squeeze) transition amplitudes used to design the final
//! transfer back to the ground state.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::C64;

/// Default admissible probability mass above the truncation level.
pub const DEFAULT_TAIL_TOL: f64 = 1e-14;

/// Double-root acceptance threshold on the minimum of the quadratic
/// `a1 |β|² + b1 |β| + c1`, i.e. on `-2 ln |⟨β|V1|α_c⟩|`.
pub const ROOT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OscillatorError {
    #[error("Fock truncation at N_max = {n_max} leaves tail mass {tail:e} > {tail_tol:e}; need N_max >= {required}")]
    Truncation { n_max: usize, tail: f64, tail_tol: f64, required: usize },
    #[error("truncated-Fock cross-check did not converge (last change {change:e} at N = {n})")]
    NotConverged { n: usize, change: f64 },
    #[error("no admissible |β|: best achievable modulus {best_modulus} at |β| = {best_beta}")]
    NoSolution { best_modulus: f64, best_beta: f64 },
    #[error("invalid squeeze parameters: r = {0} < 0")]
    NegativeSqueeze(f64),
}

/// Coherent-state label `α`; `|α|²` is the mean number of quanta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentLabel {
    pub alpha: C64,
}

impl CoherentLabel {
    pub fn new(alpha: C64) -> Self {
        Self { alpha }
    }

    pub fn from_polar(modulus: f64, phase: f64) -> Self {
        Self { alpha: C64::from_polar(modulus, phase) }
    }

    pub fn mean_n(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn phase(&self) -> f64 {
        self.alpha.arg()
    }
}

/// Squeeze-then-rotate parameters of `S(z) exp(-i phi_rot n)`, `z = r e^{i phi_sq}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    pub r: f64,
    pub phi_sq: f64,
    pub phi_rot: f64,
}

impl SqueezeParams {
    pub fn new(r: f64, phi_sq: f64, phi_rot: f64) -> Result<Self, OscillatorError> {
        if !(r >= 0.0) {
            return Err(OscillatorError::NegativeSqueeze(r));
        }
        Ok(Self { r, phi_sq: wrap_phase(phi_sq), phi_rot })
    }

    pub fn z(&self) -> C64 {
        C64::from_polar(self.r, self.phi_sq)
    }
}

/// Angle reduced to `[0, 2π)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(std::f64::consts::TAU);
    if w >= std::f64::consts::TAU {
        0.0
    } else {
        w
    }
}

/// Truncated number-state expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub amps: Vec<C64>,
    pub tail_tol: f64,
}

impl FockVector {
    pub fn new(amps: Vec<C64>, tail_tol: f64) -> Self {
        Self { amps, tail_tol }
    }

    pub fn vacuum(n_max: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); n_max + 1];
        amps[0] = C64::new(1.0, 0.0);
        Self { amps, tail_tol: DEFAULT_TAIL_TOL }
    }

    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩` over the common block.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Zero-pad or cut to `n_max`.
    pub fn resized(&self, n_max: usize) -> FockVector {
        let mut amps = self.amps.clone();
        amps.resize(n_max + 1, C64::new(0.0, 0.0));
        FockVector { amps, tail_tol: self.tail_tol }
    }

    pub fn to_dvector(&self) -> DVector<C64> {
        DVector::from_vec(self.amps.clone())
    }

    pub fn from_dvector(v: &DVector<C64>, tail_tol: f64) -> Self {
        Self { amps: v.iter().copied().collect(), tail_tol }
    }

    /// `exp(-i phi n)` applied in place.
    pub fn rotate(&mut self, phi: f64) {
        for (k, a) in self.amps.iter_mut().enumerate() {
            *a *= C64::from_polar(1.0, -phi * k as f64);
        }
    }

    /// True when the norm lies in `[1 - tail_tol, 1]` up to rounding.
    pub fn norm_within_budget(&self) -> bool {
        let n = self.norm();
        n <= 1.0 + 1e-12 && n >= 1.0 - self.tail_tol - 1e-12
    }
}

fn poisson_terms(mean_n: f64, k_max: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(k_max + 1);
    if mean_n == 0.0 {
        p.push(1.0);
        p.resize(k_max + 1, 0.0);
        return p;
    }
    let ln_mean = mean_n.ln();
    let mut ln_fact = 0.0;
    for k in 0..=k_max {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        p.push((k as f64 * ln_mean - mean_n - ln_fact).exp());
    }
    p
}

/// Poisson mass strictly above `n_max`.
pub fn poisson_tail(mean_n: f64, n_max: usize) -> f64 {
    let k_top = n_max + 60 + (mean_n + 40.0 * mean_n.sqrt()).ceil() as usize;
    poisson_terms(mean_n, k_top)[n_max + 1..].iter().rev().sum()
}

/// Smallest `N` with Poisson tail above `N` below `tail_tol`.
pub fn fock_size(mean_n: f64, tail_tol: f64) -> usize {
    let k_top = 60 + (mean_n + 40.0 * mean_n.sqrt() + 40.0).ceil() as usize;
    let p = poisson_terms(mean_n, k_top);
    let mut tail = 0.0;
    let mut tails = vec![0.0; k_top + 1];
    for k in (0..=k_top).rev() {
        tails[k] = tail;
        tail += p[k];
    }
    (0..=k_top).find(|&n| tails[n] < tail_tol).unwrap_or(k_top)
}

/// Truncation level for squeeze operations: the coherent rule, doubled.
pub fn squeeze_fock_size(mean_n: f64, tail_tol: f64) -> usize {
    2 * fock_size(mean_n, tail_tol).max(8)
}

/// `exp(-|α|²/2) α^k / √k!` for `k = 0..=n_max`.
pub fn coherent_fock(alpha: C64, n_max: usize, tail_tol: f64) -> Result<FockVector, OscillatorError> {
    let mean_n = alpha.norm_sqr();
    let tail = poisson_tail(mean_n, n_max);
    if tail > tail_tol {
        return Err(OscillatorError::Truncation {
            n_max,
            tail,
            tail_tol,
            required: fock_size(mean_n, tail_tol),
        });
    }
    Ok(FockVector { amps: coherent_amplitudes(alpha, n_max), tail_tol })
}

fn coherent_amplitudes(alpha: C64, n_max: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut cur = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for k in 0..=n_max {
        if k > 0 {
            cur = cur * alpha / (k as f64).sqrt();
        }
        amps.push(cur);
    }
    amps
}

/// `⟨α|β⟩ = exp(-|α|²/2 - |β|²/2 + α* β)`.
pub fn coherent_overlap(alpha: C64, beta: C64) -> C64 {
    (-0.5 * alpha.norm_sqr() - 0.5 * beta.norm_sqr() + alpha.conj() * beta).exp()
}

/// `|A_j| = exp(-|α|² (1 - cos ω0 ΔT))`.
pub fn amplitude_aj(mean_n: f64, omega0: f64, delta_t: f64) -> f64 {
    (-mean_n * (1.0 - (omega0 * delta_t).cos())).exp()
}

/// Second-order expansion `1 - |α_c|² ω_c² ΔT² (j-1)² (v0/v)²`.
pub fn probability_series(mean_n_c: f64, omega_c: f64, delta_t_cycle: f64, j: usize, ratio: f64) -> f64 {
    let x = omega_c * delta_t_cycle * (j.saturating_sub(1)) as f64 * ratio;
    1.0 - mean_n_c * x * x
}

/// Projection probability `exp(-2|α_c|² (1 - cos ω_c δT))` for arrival-time difference `δT`.
pub fn probability_exact(mean_n_c: f64, omega_c: f64, delta_t: f64) -> f64 {
    (-2.0 * mean_n_c * (1.0 - (omega_c * delta_t).cos())).exp()
}

/// `α e^{-iφ}`.
pub fn rotate_coherent(alpha: C64, phi: f64) -> C64 {
    alpha * C64::from_polar(1.0, -phi)
}

/// `⟨α1| S(z) |β1⟩` with `S(z) = exp[½(z a² - z* a†²)]`.
pub fn squeeze_amplitude(alpha1: C64, beta1: C64, z: C64) -> C64 {
    let r = z.norm();
    let phi = z.arg();
    let c = r.cosh();
    let t = r.tanh();
    let e = C64::from_polar(1.0, phi);
    let a1c = alpha1.conj();
    let expo = -0.5 * (alpha1.norm_sqr() + beta1.norm_sqr())
        + a1c * beta1 / c
        + 0.5 * t * (beta1 * beta1 * e - a1c * a1c * e.conj());
    expo.exp() / c.sqrt()
}

/// Annihilation operator on `0..=n_max`.
pub fn annihilation(n_max: usize) -> DMatrix<C64> {
    let n = n_max + 1;
    let mut a = DMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    a
}

/// Truncated `S(z)`: matrix exponential of the truncated generator.
pub fn squeeze_matrix(z: C64, n_max: usize) -> DMatrix<C64> {
    let a = annihilation(n_max);
    let ad = a.adjoint();
    let gen = (&a * &a) * (z * 0.5) - (&ad * &ad) * (z.conj() * 0.5);
    gen.exp()
}

/// Truncated `D(β) = exp(β a† - β* a)`.
pub fn displacement_matrix(beta: C64, n_max: usize) -> DMatrix<C64> {
    let a = annihilation(n_max);
    let gen = a.adjoint() * beta - &a * beta.conj();
    gen.exp()
}

/// Diagonal `exp(-i φ n)`.
pub fn rotation_matrix(phi: f64, n_max: usize) -> DMatrix<C64> {
    DMatrix::from_diagonal(&DVector::from_fn(n_max + 1, |k, _| C64::from_polar(1.0, -phi * k as f64)))
}

/// `S(z) exp(-i φ_rot n)` truncated at `n_max`.
pub fn transfer_matrix(sq: &SqueezeParams, n_max: usize) -> DMatrix<C64> {
    squeeze_matrix(sq.z(), n_max) * rotation_matrix(sq.phi_rot, n_max)
}

/// `⟨α1|S(z)|β1⟩` by truncated-Fock matrix exponentiation, growing the
/// truncation until successive values agree.
pub fn squeeze_amplitude_numeric(
    alpha1: C64,
    beta1: C64,
    z: C64,
    tail_tol: f64,
) -> Result<C64, OscillatorError> {
    let mean = alpha1.norm_sqr().max(beta1.norm_sqr());
    let mut n = squeeze_fock_size(mean, tail_tol);
    let mut prev: Option<C64> = None;
    for _ in 0..6 {
        let s = squeeze_matrix(z, n);
        let a = DVector::from_vec(coherent_amplitudes(alpha1, n));
        let b = DVector::from_vec(coherent_amplitudes(beta1, n));
        let amp = a.dotc(&(s * b));
        if let Some(p) = prev {
            let change = (amp - p).norm();
            if change < 1e-12 {
                return Ok(amp);
            }
            if n > 400 {
                return Err(OscillatorError::NotConverged { n, change });
            }
        }
        prev = Some(amp);
        n += n / 2;
    }
    Err(OscillatorError::NotConverged { n, change: f64::NAN })
}

/// Coefficients of `a1 |β|² + b1 |β| + c1 = -2 ln |⟨β|V1|α_c⟩|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferCoefficients {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
}

impl TransferCoefficients {
    pub fn new(alpha_c: CoherentLabel, gamma: f64, sq: &SqueezeParams) -> Self {
        let ac = alpha_c.alpha.norm();
        let gc = alpha_c.phase();
        let c = sq.r.cosh();
        let t = sq.r.tanh();
        Self {
            a1: 1.0 + t * (2.0 * gamma + sq.phi_sq).cos(),
            b1: -2.0 * ac / c * (-gamma + gc - sq.phi_rot).cos(),
            c1: c.ln() + ac * ac * (1.0 - t * (2.0 * gc - 2.0 * sq.phi_rot + sq.phi_sq).cos()),
        }
    }

    pub fn eval(&self, beta: f64) -> f64 {
        (self.a1 * beta + self.b1) * beta + self.c1
    }

    pub fn discriminant(&self) -> f64 {
        self.b1 * self.b1 - 4.0 * self.a1 * self.c1
    }

    /// Vertex value `c1 - b1²/(4 a1)`.
    pub fn minimum(&self) -> f64 {
        self.c1 - self.b1 * self.b1 / (4.0 * self.a1)
    }
}

/// `|⟨β|S(z) e^{-iφ_rot n}|α_c⟩|` for `β = |β| e^{iγ}` in closed form.
pub fn transfer_modulus(alpha_c: CoherentLabel, beta_abs: f64, gamma: f64, sq: &SqueezeParams) -> f64 {
    (-0.5 * TransferCoefficients::new(alpha_c, gamma, sq).eval(beta_abs)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferSolution {
    pub coefficients: TransferCoefficients,
    /// Admissible `|β| ≥ 0`.
    pub roots: Vec<f64>,
    /// `|modulus - 1|` at each root.
    pub residuals: Vec<f64>,
}

/// Non-negative `|β|` for which `V1` moves `|α_c⟩` entirely onto `|β e^{iγ}⟩`.
///
/// The quadratic is `-2 ln` of a transition probability amplitude, hence
/// never negative: admissible roots are double roots at its vertex. A vertex
/// value below [`ROOT_TOL`] is accepted as a root.
pub fn solve_full_transfer(
    alpha_c: CoherentLabel,
    gamma: f64,
    sq: &SqueezeParams,
) -> Result<TransferSolution, OscillatorError> {
    let coefficients = TransferCoefficients::new(alpha_c, gamma, sq);
    let TransferCoefficients { a1, b1, .. } = coefficients;
    let disc = coefficients.discriminant();
    let mut roots = Vec::new();
    if disc > 0.0 && coefficients.minimum() < -ROOT_TOL {
        let s = disc.sqrt();
        for root in [(-b1 - s) / (2.0 * a1), (-b1 + s) / (2.0 * a1)] {
            if root >= 0.0 {
                roots.push(root);
            }
        }
    } else if coefficients.minimum() <= ROOT_TOL {
        let vertex = -b1 / (2.0 * a1);
        if vertex >= 0.0 {
            roots.push(vertex);
        }
    }
    if roots.is_empty() {
        let best_beta = (-b1 / (2.0 * a1)).max(0.0);
        return Err(OscillatorError::NoSolution {
            best_modulus: (-0.5 * coefficients.eval(best_beta)).exp(),
            best_beta,
        });
    }
    let residuals = roots
        .iter()
        .map(|&b| ((-0.5 * coefficients.eval(b)).exp() - 1.0).abs())
        .collect();
    Ok(TransferSolution { coefficients, roots, residuals })
}

/// Truncated `D(-β)` and its fidelity `|⟨0|D(-β)|β⟩|`.
#[derive(Debug, Clone)]
pub struct DisplacementTransfer {
    pub matrix: DMatrix<C64>,
    pub fidelity: f64,
}

pub fn displacement_transfer(
    beta: C64,
    n_max: usize,
    tail_tol: f64,
) -> Result<DisplacementTransfer, OscillatorError> {
    let psi = coherent_fock(beta, n_max, tail_tol)?;
    let matrix = displacement_matrix(-beta, n_max);
    let out = &matrix * psi.to_dvector();
    Ok(DisplacementTransfer { fidelity: out[0].norm(), matrix })
}
