use super::{SpinorWave, WaveError};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KickDirection {
    /// Laser along +x: momentum gain.
    Co,
    /// Laser along -x: momentum loss.
    Counter,
}

/// A window-limited photon kick on one internal level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickSpec {
    pub hbar_k: f64,
    pub direction: KickDirection,
    pub level: usize,
    /// Exchange the two levels inside the window after the kick.
    pub swap: bool,
    pub window: (f64, f64),
}

impl KickSpec {
    pub fn signed_k(&self) -> f64 {
        match self.direction {
            KickDirection::Co => self.hbar_k,
            KickDirection::Counter => -self.hbar_k,
        }
    }
}

/// Multiply the target level by `e^{±ikx}` inside the window, then swap the
/// levels there if requested. Pointwise unimodular, so the norm is kept.
pub fn apply_kick(wave: &mut SpinorWave, kick: &KickSpec) -> Result<(), WaveError> {
    let g = wave.grid;
    if kick.level > 1 || kick.window.0 < g.x_min || kick.window.1 > g.x_max || kick.window.0 > kick.window.1 {
        return Err(WaveError::Geometry(format!("kick window {:?} / level {}", kick.window, kick.level)));
    }
    let k = kick.signed_k();
    let [l0, l1] = &mut wave.levels;
    for i in g.range(kick.window.0, kick.window.1) {
        let target = if kick.level == 0 { &mut l0[i] } else { &mut l1[i] };
        *target *= C64::from_polar(1.0, k * g.x(i));
        if kick.swap {
            std::mem::swap(&mut l0[i], &mut l1[i]);
        }
    }
    Ok(())
}

/// Equal kicks that together change the momentum by `total` (sign included).
pub fn kick_train(total: f64, count: usize, level: usize, window: (f64, f64)) -> Vec<KickSpec> {
    let count = count.max(1);
    let direction = if total >= 0.0 { KickDirection::Co } else { KickDirection::Counter };
    (0..count)
        .map(|_| KickSpec { hbar_k: total.abs() / count as f64, direction, level, swap: false, window })
        .collect()
}
