//! Circuit-level model of the halting units `Qc` (three halting levels) and
//! `Qh` (four levels), built from sparse gates on a composite Hilbert space.
//!
//! The lock step needs somewhere to put the information about *when* it
//! fired: a map sending both `C1` and an already-locked `C2` into `C2` would
//! not be injective. The composite space therefore carries a lock record
//! with `m + 1` levels; the lock of cycle `i` exchanges
//! `|C1, unlocked⟩ <-> |C2, record i⟩`. The halting, branch and functional
//! registers still end in `|C2, 1, blank⟩` for every input.

mod conflict;
mod gates;
mod program;
mod space;
mod sparse;

use thiserror::Error;

use crate::cyclic_group::GroupError;

pub use conflict::{
    conflict_bound, haar_unitary, unitarity_defect_dense, ConflictProbabilities,
};
pub use gates::{build_gate, cycle_sequence, GateKind, LockModel};
pub use program::{
    amplitude, expected_trigger_cycle, halted_probability, program_gates, run_program,
    run_with_gates, CycleRecord, OutputOutcome, ProgramRun,
};
pub use space::{
    BasisLabel, CompositeSpace, CompositeState, HaltingLevel, Symbol, Variant, MAX_DIM,
};
pub use sparse::{commutator_norm, SparseUnitary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("functional subspace is empty")]
    EmptySubspace,
    #[error("input position {x} outside 0..{m}")]
    InputOutOfRange { x: usize, m: usize },
    #[error("composite dimension {dim} exceeds the limit {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("basis label {0:?} does not exist in this space")]
    InvalidLabel(BasisLabel),
    #[error("gate {gate} is not part of the {variant:?} unit")]
    GateNotInVariant { gate: GateKind, variant: Variant },
    #[error("lock cycle {cycle} outside 1..={m}")]
    LockCycle { cycle: usize, m: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state norm² {0} differs from 1")]
    Unnormalized(f64),
    #[error("operator is not unitary (max |U†U - I| = {0:e})")]
    NotUnitary(f64),
    #[error("states are not orthonormal (norms² {norm1}, {norm2}; overlap {overlap:e})")]
    NotOrthonormal { norm1: f64, norm2: f64, overlap: f64 },
}
