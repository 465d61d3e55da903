use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unihalt_core::protocol::{
    build_gate, commutator_norm, conflict_bound, expected_trigger_cycle, haar_unitary, halted_probability,
    program_gates, run_program, run_with_gates,
};
use unihalt_core::{
    build_subspace, BasisLabel, CompositeSpace, GateKind, GroupFactorization, HaltingLevel, LockModel, ProtocolError,
    SubspaceKind, Symbol, Variant, C64,
};

fn space(p: u64, k: usize, kind: SubspaceKind, variant: Variant) -> CompositeSpace {
    let g = GroupFactorization::new(p).unwrap();
    CompositeSpace::new(variant, build_subspace(&g, k, kind).unwrap()).unwrap()
}

fn all_spaces(p: u64) -> Vec<CompositeSpace> {
    let g = GroupFactorization::new(p).unwrap();
    let mut out = Vec::new();
    for k in 1..=g.r() {
        for kind in [SubspaceKind::Multiplicative, SubspaceKind::Additive] {
            for variant in [Variant::Qc, Variant::Qh] {
                out.push(space(p, k, kind, variant));
            }
        }
    }
    out
}

/// Hand trace of the cycle loop on positions: the branch flips in the cycle
/// whose register holds the target value.
fn hand_trace(m: usize, target: usize, x0: usize) -> usize {
    let mut x = x0;
    for cycle in 1..=m {
        if x == target {
            return cycle;
        }
        x = (x + 1) % m;
    }
    unreachable!()
}

#[test]
fn every_gate_is_unitary() {
    for s in all_spaces(11) {
        let kinds: Vec<GateKind> = match s.variant() {
            Variant::Qc => vec![GateKind::Ub, GateKind::Uh, GateKind::Ut, GateKind::UfCond],
            Variant::Qh => vec![GateKind::Ub, GateKind::Uh, GateKind::Vh, GateKind::Utr, GateKind::UfCond],
        };
        for kind in kinds.into_iter().chain((1..=s.m()).map(|cycle| GateKind::Lock { cycle })) {
            for lock in [LockModel::Ideal, LockModel::rotation_pulse(0.3)] {
                let g = build_gate(&s, kind, &lock).unwrap();
                assert!(g.unitarity_defect() < 1e-12, "{kind}");
            }
        }
    }
}

#[test]
fn gate_examples() {
    let s = space(7, 2, SubspaceKind::Multiplicative, Variant::Qc);
    let target = Symbol::Value(s.target());
    let ub = build_gate(&s, GateKind::Ub, &LockModel::Ideal).unwrap();
    let hit = s.basis_state(&BasisLabel::new(HaltingLevel::N0, 0, target, 0)).unwrap();
    let out = ub.apply(&hit).unwrap();
    let want = s.index(&BasisLabel::new(HaltingLevel::N0, 1, target, 0)).unwrap();
    assert_eq!(out.amplitudes()[want], C64::new(1.0, 0.0));
    let miss = s.basis_state(&BasisLabel::new(HaltingLevel::N0, 0, Symbol::Value(1), 0)).unwrap();
    assert_eq!(ub.apply(&miss).unwrap(), miss);
    let ut = build_gate(&s, GateKind::Ut, &LockModel::Ideal).unwrap();
    for b in 0..2 {
        let c2 = s.basis_state(&BasisLabel::new(HaltingLevel::C2, b, Symbol::Blank, 1)).unwrap();
        assert_eq!(ut.apply(&c2).unwrap(), c2);
    }
    assert!(matches!(
        build_gate(&s, GateKind::Vh, &LockModel::Ideal),
        Err(ProtocolError::GateNotInVariant { .. })
    ));
}

#[test]
fn ideal_lock_always_halts_in_c2_one_blank() {
    for p in [7u64, 11, 23] {
        for s in all_spaces(p) {
            let gates = program_gates(&s, &LockModel::Ideal).unwrap();
            let mut cycles = Vec::new();
            for x0 in 0..s.m() {
                let run = run_with_gates(&s, s.initial_state(x0).unwrap(), &gates).unwrap();
                assert_eq!((run.output.level, run.output.branch, run.output.symbol), (HaltingLevel::C2, 1, Symbol::Blank));
                assert!((halted_probability(&s, &run.final_state) - 1.0).abs() < 1e-12);
                let cycle = run.trigger_cycle.unwrap();
                assert_eq!(cycle, hand_trace(s.m(), s.target(), x0));
                assert_eq!(cycle, expected_trigger_cycle(&s, x0));
                // Idle registers stay at (N0, 0) before the trigger.
                for rec in &run.trace[..cycle - 1] {
                    assert_eq!(rec.triggered(), 0.0);
                }
                cycles.push(cycle);
            }
            cycles.sort_unstable();
            assert_eq!(cycles, (1..=s.m()).collect::<Vec<_>>());
        }
    }
}

#[test]
fn spec_trace_for_p7() {
    let s = space(7, 2, SubspaceKind::Multiplicative, Variant::Qc);
    let got: Vec<_> = (0..3).map(|x0| run_program(&s, x0, &LockModel::Ideal).unwrap().trigger_cycle.unwrap()).collect();
    assert_eq!(got, vec![1, 3, 2]);
    let add = space(7, 2, SubspaceKind::Additive, Variant::Qc);
    let run = run_program(&add, 0, &LockModel::Ideal).unwrap();
    assert_eq!(run.trigger_cycle, Some(1));
    assert_eq!(add.symbol_name(run.output.symbol), "blank");
    assert!(matches!(run_program(&s, 3, &LockModel::Ideal), Err(ProtocolError::InputOutOfRange { .. })));
}

#[test]
fn rotation_pulse_lock_leaks() {
    let s = space(11, 2, SubspaceKind::Multiplicative, Variant::Qc);
    for eps in [0.05, 0.1, 0.3] {
        let mut worst: f64 = 1.0;
        for x0 in 0..s.m() {
            let run = run_program(&s, x0, &LockModel::rotation_pulse(eps)).unwrap();
            let p = halted_probability(&s, &run.final_state);
            assert!(p < 1.0 && p >= 1.0 - eps * eps - 1e-12, "eps {eps}, x0 {x0}: {p}");
            worst = worst.min(p);
        }
        assert!((1.0 - worst) <= eps * eps + 1e-12);
    }
}

#[test]
fn commutation_with_the_lock() {
    for variant in [Variant::Qc, Variant::Qh] {
        let s = space(23, 2, SubspaceKind::Multiplicative, variant);
        let lock = build_gate(&s, GateKind::Lock { cycle: 2 }, &LockModel::Ideal).unwrap();
        for kind in [GateKind::Ub, GateKind::UfCond, GateKind::Uh] {
            let g = build_gate(&s, kind, &LockModel::Ideal).unwrap();
            assert!(commutator_norm(&lock, &g) < 1e-14, "{kind}");
        }
        let trig = if variant == Variant::Qc { GateKind::Ut } else { GateKind::Utr };
        let g = build_gate(&s, trig, &LockModel::Ideal).unwrap();
        assert!(commutator_norm(&lock, &g) > 0.1);
    }
}

#[test]
fn conflict_examples() {
    let n = 6;
    let c1 = DVector::from_fn(n, |i, _| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
    let c2 = DVector::from_fn(n, |i, _| C64::new(if i == 1 { 1.0 } else { 0.0 }, 0.0));
    let id = DMatrix::<C64>::identity(n, n);
    let r = conflict_bound(&id, &c1, &c2).unwrap();
    assert_eq!((r.p1, r.p2), (0.0, 1.0));
    let mut swap = id.clone();
    swap.swap_columns(0, 1);
    let r = conflict_bound(&swap, &c1, &c2).unwrap();
    assert_eq!((r.p1, r.p2), (1.0, 0.0));
    let mut bad = id.clone();
    bad[(2, 2)] = C64::new(2.0, 0.0);
    assert!(matches!(conflict_bound(&bad, &c1, &c2), Err(ProtocolError::NotUnitary(_))));
}

#[test]
fn conflict_bound_over_seeded_haar_unitaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 12;
    for _ in 0..200 {
        let u = haar_unitary(n, &mut rng);
        let v = haar_unitary(n, &mut rng);
        let c1 = v.column(0).into_owned();
        let c2 = v.column(1).into_owned();
        let r = conflict_bound(&u, &c1, &c2).unwrap();
        assert!(r.sum() <= 1.0 + 1e-12, "{r:?}");
    }
}
