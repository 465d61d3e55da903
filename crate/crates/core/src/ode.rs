//! Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 2_000_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0` to `t1`. `on_step` sees every accepted
/// step and may abort the integration with its own error.
pub fn integrate<const N: usize, E: From<OdeError>>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerances,
    mut on_step: impl FnMut(f64, &[f64; N]) -> Result<(), E>,
) -> Result<[f64; N], E> {
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(y0);
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = (span * 1e-3).min(1e-2);
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y);
    let mut steps = 0;
    while t < t1 {
        steps += 1;
        if steps > tol.max_steps {
            return Err(OdeError::TooManySteps { t, max_steps: tol.max_steps }.into());
        }
        let last = t + h >= t1;
        let h_eff = if last { t1 - t } else { h };
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h_eff * a * kj[i];
                    }
                }
            }
            k[s] = f(t + C[s] * h_eff, &ys);
        }
        let mut y_new = y;
        for (s, ks) in k.iter().enumerate().take(6) {
            for i in 0..N {
                y_new[i] += h_eff * A[6][s] * ks[i];
            }
        }
        let mut err = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for s in 0..7 {
                let b5 = if s < 6 { A[6][s] } else { 0.0 };
                e += (b5 - B4[s]) * k[s][i];
            }
            let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err += (h_eff * e / scale).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            return Err(OdeError::NonFinite { t }.into());
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + h_eff };
            y = y_new;
            // First-same-as-last: stage 7 was evaluated at the new point.
            k[0] = k[6];
            on_step(t, &y)?;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 && last {
            break;
        }
        h = h_eff * factor;
        if h < 1e-14 * (1.0 + t.abs()) {
            return Err(OdeError::StepUnderflow { t }.into());
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let y = integrate::<2, OdeError>(
            |_, y| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            std::f64::consts::TAU,
            Tolerances::default(),
            |_, _| Ok(()),
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9);
    }

    #[test]
    fn exponential_growth() {
        let y = integrate::<1, OdeError>(|_, y| [y[0]], 0.0, [1.0], 2.0, Tolerances::default(), |_, _| Ok(()))
            .unwrap();
        assert!((y[0] - 2f64.exp()).abs() < 1e-9 * 2f64.exp());
    }
}
