//! Reversible, unitary halting: a finite-dimensional circuit model of the
//! halting protocol on cyclic subgroups of `Z_p^*`, the coherent-state
//! analytics of its harmonic-oscillator control register, frequency
//! modulation design, and split-operator wave-packet simulation of the
//! double-well halting cycle.

pub mod cyclic_group;
pub mod kinematics;
pub mod modulation;
pub mod ode;
pub mod oscillator;
pub mod protocol;
pub mod wavepacket;

pub use num_complex::Complex64 as C64;

pub use cyclic_group::{
    build_subspace, factorize_order, find_primitive_root, FactorEntry, FunctionalSubspace,
    GroupError, GroupFactorization, SubspaceKind,
};
pub use kinematics::{KinematicsError, Schedule, ScheduleConfig};
pub use modulation::{BogoliubovPair, ModulationError, ModulationProfile};
pub use oscillator::{CoherentLabel, FockVector, OscillatorError, SqueezeParams};
pub use protocol::{
    BasisLabel, CompositeSpace, CompositeState, GateKind, HaltingLevel, LockModel, ProtocolError,
    SparseUnitary, Symbol, Variant,
};
pub use wavepacket::{Grid1D, PotentialSpec, SpinorWave, WaveError};
