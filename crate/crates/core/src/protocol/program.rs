use crate::C64;

use super::gates::{build_gate, cycle_sequence};
use super::{
    BasisLabel, CompositeSpace, CompositeState, GateKind, HaltingLevel, LockModel, ProtocolError,
    SparseUnitary, Symbol,
};

/// Level populations after one full cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    pub populations: Vec<(HaltingLevel, f64)>,
}

impl CycleRecord {
    pub fn population(&self, level: HaltingLevel) -> f64 {
        self.populations.iter().find(|(l, _)| *l == level).map_or(0.0, |(_, p)| *p)
    }

    /// Probability of having left the idle levels.
    pub fn triggered(&self) -> f64 {
        self.population(HaltingLevel::C1) + self.population(HaltingLevel::C2)
    }
}

/// Marginal over the lock record of one (halting, branch, functional) triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputOutcome {
    pub level: HaltingLevel,
    pub branch: u8,
    pub symbol: Symbol,
    pub probability: f64,
}

#[derive(Debug, Clone)]
pub struct ProgramRun {
    pub final_state: CompositeState,
    pub trace: Vec<CycleRecord>,
    /// First cycle after which at least half of the probability has triggered.
    pub trigger_cycle: Option<usize>,
    /// Most probable (halting, branch, functional) outcome.
    pub output: OutputOutcome,
    /// Norm drift accumulated over the run.
    pub norm_drift: f64,
}

/// Probability of `|C2, 1, blank⟩` summed over lock records.
pub fn halted_probability(space: &CompositeSpace, state: &CompositeState) -> f64 {
    state.probability_where(space, |l| {
        l.level == HaltingLevel::C2 && l.branch == 1 && l.symbol == Symbol::Blank
    })
}

/// Cycle in which an input `x0` is expected to trigger.
pub fn expected_trigger_cycle(space: &CompositeSpace, x0: usize) -> usize {
    let m = space.m();
    (space.target() + m - x0 % m) % m + 1
}

/// Gates of every cycle, ready for application.
pub fn program_gates(
    space: &CompositeSpace,
    lock: &LockModel,
) -> Result<Vec<(GateKind, SparseUnitary)>, ProtocolError> {
    let mut cache: Vec<(GateKind, SparseUnitary)> = Vec::new();
    let mut out = Vec::new();
    for cycle in 1..=space.m() {
        for kind in cycle_sequence(space.variant(), cycle) {
            let gate = match cache.iter().find(|(k, _)| *k == kind) {
                Some((_, g)) => g.clone(),
                None => {
                    let g = build_gate(space, kind, lock)?;
                    if !matches!(kind, GateKind::Lock { .. }) {
                        cache.push((kind, g.clone()));
                    }
                    g
                }
            };
            out.push((kind, gate));
        }
    }
    Ok(out)
}

/// Run all `m` cycles on `|N0, 0, f(x0)⟩`.
pub fn run_program(
    space: &CompositeSpace,
    x0: usize,
    lock: &LockModel,
) -> Result<ProgramRun, ProtocolError> {
    let gates = program_gates(space, lock)?;
    run_with_gates(space, space.initial_state(x0)?, &gates)
}

pub fn run_with_gates(
    space: &CompositeSpace,
    initial: CompositeState,
    gates: &[(GateKind, SparseUnitary)],
) -> Result<ProgramRun, ProtocolError> {
    let norm0 = initial.norm_sqr();
    if (norm0 - 1.0).abs() > 1e-12 {
        return Err(ProtocolError::Unnormalized(norm0));
    }
    let mut psi = initial.into_amplitudes();
    let mut trace = Vec::new();
    let mut trigger_cycle = None;
    let per_cycle = gates.len() / space.m();
    for (n, (_, gate)) in gates.iter().enumerate() {
        psi = gate.apply_slice(&psi);
        if (n + 1) % per_cycle == 0 {
            let cycle = (n + 1) / per_cycle;
            let state = CompositeState::from_amplitudes(psi);
            let populations: Vec<_> = space
                .levels()
                .iter()
                .map(|&lvl| (lvl, state.probability_where(space, |l| l.level == lvl)))
                .collect();
            let record = CycleRecord { cycle, populations };
            if trigger_cycle.is_none() && record.triggered() >= 0.5 {
                trigger_cycle = Some(cycle);
            }
            trace.push(record);
            psi = state.into_amplitudes();
        }
    }
    let final_state = CompositeState::from_amplitudes(psi);
    let norm_drift = (final_state.norm_sqr() - norm0).abs();
    let output = dominant_outcome(space, &final_state);
    Ok(ProgramRun { final_state, trace, trigger_cycle, output, norm_drift })
}

fn dominant_outcome(space: &CompositeSpace, state: &CompositeState) -> OutputOutcome {
    let mut marg: Vec<(BasisLabel, f64)> = Vec::new();
    for (i, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let key = BasisLabel { record: 0, ..space.label(i) };
        match marg.iter_mut().find(|(k, _)| *k == key) {
            Some((_, acc)) => *acc += p,
            None => marg.push((key, p)),
        }
    }
    let (best, probability) = marg
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((BasisLabel::new(HaltingLevel::N0, 0, Symbol::Blank, 0), 0.0));
    OutputOutcome { level: best.level, branch: best.branch, symbol: best.symbol, probability }
}

/// Amplitude of `label` in `state`.
pub fn amplitude(
    space: &CompositeSpace,
    state: &CompositeState,
    label: &BasisLabel,
) -> Result<C64, ProtocolError> {
    Ok(state.amplitudes()[space.index(label)?])
}
