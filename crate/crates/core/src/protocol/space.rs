use std::fmt;

use crate::cyclic_group::{FunctionalSubspace, SubspaceKind};
use crate::C64;

use super::ProtocolError;

/// Largest composite dimension we are willing to allocate.
pub const MAX_DIM: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Three halting levels, direct trigger `N0 -> C1`.
    Qc,
    /// Four levels; the trigger goes through the extra idle level `N1`.
    Qh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HaltingLevel {
    N0,
    N1,
    C1,
    C2,
}

impl fmt::Display for HaltingLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HaltingLevel::N0 => "N0",
            HaltingLevel::N1 => "N1",
            HaltingLevel::C1 => "C1",
            HaltingLevel::C2 => "C2",
        };
        f.write_str(s)
    }
}

/// Content of the functional register: the blank, or `f(x)` stored by position `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Blank,
    Value(usize),
}

/// Computational basis label. `record` is the lock register: 0 while unlocked,
/// `i` once the lock fired in cycle `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub level: HaltingLevel,
    pub branch: u8,
    pub symbol: Symbol,
    pub record: usize,
}

impl BasisLabel {
    pub fn new(level: HaltingLevel, branch: u8, symbol: Symbol, record: usize) -> Self {
        Self { level, branch, symbol, record }
    }
}

/// Halting ⊗ branch ⊗ functional ⊗ lock-record space for one subspace.
#[derive(Debug, Clone)]
pub struct CompositeSpace {
    variant: Variant,
    subspace: FunctionalSubspace,
    target: usize,
    levels: Vec<HaltingLevel>,
}

impl CompositeSpace {
    /// Space whose desired value is `f(0)` (1 for the multiplicative kind, 0 for the additive one).
    pub fn new(variant: Variant, subspace: FunctionalSubspace) -> Result<Self, ProtocolError> {
        Self::with_target(variant, subspace, 0)
    }

    pub fn with_target(
        variant: Variant,
        subspace: FunctionalSubspace,
        target: usize,
    ) -> Result<Self, ProtocolError> {
        let m = subspace.m();
        if m == 0 {
            return Err(ProtocolError::EmptySubspace);
        }
        if target >= m {
            return Err(ProtocolError::InputOutOfRange { x: target, m });
        }
        let levels = match variant {
            Variant::Qc => vec![HaltingLevel::N0, HaltingLevel::C1, HaltingLevel::C2],
            Variant::Qh => {
                vec![HaltingLevel::N0, HaltingLevel::N1, HaltingLevel::C1, HaltingLevel::C2]
            }
        };
        let dim = levels.len() * 2 * (m + 1) * (m + 1);
        if dim > MAX_DIM {
            return Err(ProtocolError::TooLarge { dim, max: MAX_DIM });
        }
        Ok(Self { variant, subspace, target, levels })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn subspace(&self) -> &FunctionalSubspace {
        &self.subspace
    }

    pub fn m(&self) -> usize {
        self.subspace.m()
    }

    /// Position `x_f` of the desired value.
    pub fn target(&self) -> usize {
        self.target
    }

    pub fn levels(&self) -> &[HaltingLevel] {
        &self.levels
    }

    fn n_symbols(&self) -> usize {
        self.m() + 1
    }

    fn n_records(&self) -> usize {
        self.m() + 1
    }

    pub fn dim(&self) -> usize {
        self.levels.len() * 2 * self.n_symbols() * self.n_records()
    }

    pub fn has_level(&self, level: HaltingLevel) -> bool {
        self.levels.contains(&level)
    }

    fn level_pos(&self, level: HaltingLevel) -> Option<usize> {
        self.levels.iter().position(|&l| l == level)
    }

    pub fn index(&self, label: &BasisLabel) -> Result<usize, ProtocolError> {
        let h = self.level_pos(label.level).ok_or(ProtocolError::InvalidLabel(*label))?;
        let f = match label.symbol {
            Symbol::Blank => 0,
            Symbol::Value(x) if x < self.m() => x + 1,
            Symbol::Value(_) => return Err(ProtocolError::InvalidLabel(*label)),
        };
        if label.branch > 1 || label.record >= self.n_records() {
            return Err(ProtocolError::InvalidLabel(*label));
        }
        Ok(((h * 2 + label.branch as usize) * self.n_symbols() + f) * self.n_records() + label.record)
    }

    pub fn label(&self, index: usize) -> BasisLabel {
        let record = index % self.n_records();
        let rest = index / self.n_records();
        let f = rest % self.n_symbols();
        let rest = rest / self.n_symbols();
        let branch = (rest % 2) as u8;
        let level = self.levels[rest / 2];
        let symbol = if f == 0 { Symbol::Blank } else { Symbol::Value(f - 1) };
        BasisLabel { level, branch, symbol, record }
    }

    pub fn basis_state(&self, label: &BasisLabel) -> Result<CompositeState, ProtocolError> {
        let mut amps = vec![C64::new(0.0, 0.0); self.dim()];
        amps[self.index(label)?] = C64::new(1.0, 0.0);
        Ok(CompositeState { amps })
    }

    /// `|N0, 0, f(x0), unlocked⟩`.
    pub fn initial_state(&self, x0: usize) -> Result<CompositeState, ProtocolError> {
        if x0 >= self.m() {
            return Err(ProtocolError::InputOutOfRange { x: x0, m: self.m() });
        }
        self.basis_state(&BasisLabel::new(HaltingLevel::N0, 0, Symbol::Value(x0), 0))
    }

    /// Human-readable functional content: the stored value, `0` for the
    /// multiplicative blank, `blank` for the additive one.
    pub fn symbol_name(&self, symbol: Symbol) -> String {
        match (symbol, self.subspace.kind()) {
            (Symbol::Value(x), _) => self.subspace.value(x).to_string(),
            (Symbol::Blank, SubspaceKind::Multiplicative) => "0".to_string(),
            (Symbol::Blank, SubspaceKind::Additive) => "blank".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    amps: Vec<C64>,
}

impl CompositeState {
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &CompositeState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Total probability of basis states whose label satisfies `pred`.
    pub fn probability_where(
        &self,
        space: &CompositeSpace,
        mut pred: impl FnMut(&BasisLabel) -> bool,
    ) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .filter(|(i, _)| pred(&space.label(*i)))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}
