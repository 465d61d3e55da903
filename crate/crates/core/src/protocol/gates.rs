use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::C64;

use super::{BasisLabel, CompositeSpace, HaltingLevel, ProtocolError, SparseUnitary, Symbol, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    /// Flip the branch qubit iff the functional register holds the desired value.
    Ub,
    /// While idle (`N0`), exchange the desired value with the blank.
    Uh,
    /// Exchange `N0 <-> C1` iff the functional register is blank.
    Ut,
    /// Lock the triggered state in cycle `cycle` (1-based).
    Lock { cycle: usize },
    /// Cyclic shift of the functional register iff the branch qubit is 0.
    UfCond,
    /// Exchange `N0 <-> N1` iff the functional register is blank (four-level variant).
    Vh,
    /// Exchange `N1 <-> C1` unconditionally (four-level variant).
    Utr,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::Ub => f.write_str("Ub"),
            GateKind::Uh => f.write_str("Uh"),
            GateKind::Ut => f.write_str("Ut"),
            GateKind::Lock { cycle } => write!(f, "Lock({cycle})"),
            GateKind::UfCond => f.write_str("UfCond"),
            GateKind::Vh => f.write_str("Vh"),
            GateKind::Utr => f.write_str("Utr"),
        }
    }
}

/// How the lock step moves `C1` into `C2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LockModel {
    /// Complete transfer.
    Ideal,
    /// Partial transfer leaving amplitude `epsilon` in `C1`:
    /// `C1 -> epsilon C1 + e^{-i gamma} sqrt(1 - epsilon^2) C2`.
    RotationPulse { epsilon: f64, gamma: f64 },
}

impl LockModel {
    /// Rotation pulse with the default phase, `cos θ C1 - i sin θ C2` for `epsilon = cos θ`.
    pub fn rotation_pulse(epsilon: f64) -> Self {
        LockModel::RotationPulse { epsilon, gamma: FRAC_PI_2 }
    }

    fn coefficients(&self) -> (f64, C64) {
        match *self {
            LockModel::Ideal => (0.0, C64::new(1.0, 0.0)),
            LockModel::RotationPulse { epsilon, gamma } => {
                let s = (1.0 - epsilon * epsilon).max(0.0).sqrt();
                (epsilon, C64::from_polar(s, -gamma))
            }
        }
    }
}

/// Gate order of cycle `cycle`.
pub fn cycle_sequence(variant: Variant, cycle: usize) -> Vec<GateKind> {
    match variant {
        Variant::Qc => vec![
            GateKind::Ub,
            GateKind::Uh,
            GateKind::Ut,
            GateKind::Lock { cycle },
            GateKind::UfCond,
        ],
        Variant::Qh => vec![
            GateKind::Ub,
            GateKind::Uh,
            GateKind::Vh,
            GateKind::Utr,
            GateKind::Lock { cycle },
            GateKind::UfCond,
        ],
    }
}

fn relabel(
    space: &CompositeSpace,
    map: impl Fn(BasisLabel) -> BasisLabel,
) -> Result<SparseUnitary, ProtocolError> {
    let dim = space.dim();
    let mut cols = Vec::with_capacity(dim);
    for c in 0..dim {
        let target = map(space.label(c));
        cols.push(vec![(space.index(&target)?, C64::new(1.0, 0.0))]);
    }
    Ok(SparseUnitary::from_columns(cols))
}

fn swap_levels(level: HaltingLevel, a: HaltingLevel, b: HaltingLevel) -> HaltingLevel {
    if level == a {
        b
    } else if level == b {
        a
    } else {
        level
    }
}

/// Sparse matrix of `kind` on `space`.
pub fn build_gate(
    space: &CompositeSpace,
    kind: GateKind,
    lock: &LockModel,
) -> Result<SparseUnitary, ProtocolError> {
    let target = Symbol::Value(space.target());
    let sub = space.subspace();
    match kind {
        GateKind::Ub => relabel(space, |mut l| {
            if l.symbol == target {
                l.branch ^= 1;
            }
            l
        }),
        GateKind::Uh => relabel(space, |mut l| {
            if l.level == HaltingLevel::N0 {
                if l.symbol == target {
                    l.symbol = Symbol::Blank;
                } else if l.symbol == Symbol::Blank {
                    l.symbol = target;
                }
            }
            l
        }),
        GateKind::Ut => relabel(space, |mut l| {
            if l.symbol == Symbol::Blank {
                l.level = swap_levels(l.level, HaltingLevel::N0, HaltingLevel::C1);
            }
            l
        }),
        GateKind::UfCond => relabel(space, |mut l| {
            if l.branch == 0 {
                if let Symbol::Value(x) = l.symbol {
                    l.symbol = Symbol::Value(sub.shift_index(x));
                }
            }
            l
        }),
        GateKind::Vh | GateKind::Utr if space.variant() != Variant::Qh => {
            Err(ProtocolError::GateNotInVariant { gate: kind, variant: space.variant() })
        }
        GateKind::Vh => relabel(space, |mut l| {
            if l.symbol == Symbol::Blank {
                l.level = swap_levels(l.level, HaltingLevel::N0, HaltingLevel::N1);
            }
            l
        }),
        GateKind::Utr => relabel(space, |mut l| {
            l.level = swap_levels(l.level, HaltingLevel::N1, HaltingLevel::C1);
            l
        }),
        GateKind::Lock { cycle } => lock_gate(space, cycle, lock),
    }
}

fn lock_gate(
    space: &CompositeSpace,
    cycle: usize,
    lock: &LockModel,
) -> Result<SparseUnitary, ProtocolError> {
    if cycle == 0 || cycle > space.m() {
        return Err(ProtocolError::LockCycle { cycle, m: space.m() });
    }
    let (eps, t) = lock.coefficients();
    let dim = space.dim();
    let mut cols = Vec::with_capacity(dim);
    for c in 0..dim {
        let l = space.label(c);
        let col = match (l.level, l.record) {
            (HaltingLevel::C1, 0) => {
                let partner = space.index(&BasisLabel { level: HaltingLevel::C2, record: cycle, ..l })?;
                push_nonzero(vec![(c, C64::new(eps, 0.0)), (partner, t)])
            }
            (HaltingLevel::C2, r) if r == cycle => {
                let partner = space.index(&BasisLabel { level: HaltingLevel::C1, record: 0, ..l })?;
                push_nonzero(vec![(partner, -t.conj()), (c, C64::new(eps, 0.0))])
            }
            _ => vec![(c, C64::new(1.0, 0.0))],
        };
        cols.push(col);
    }
    Ok(SparseUnitary::from_columns(cols))
}

fn push_nonzero(entries: Vec<(usize, C64)>) -> Vec<(usize, C64)> {
    entries.into_iter().filter(|(_, v)| v.norm_sqr() > 0.0).collect()
}
