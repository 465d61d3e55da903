//! Invariant checks across all modules, at two depths.

use std::f64::consts::TAU;
use std::fmt;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unihalt_core::cyclic_group::{is_prime, mod_pow};
use unihalt_core::kinematics::{arriving_times, end_positions, search_threshold};
use unihalt_core::modulation::{
    integrate_bogoliubov, integrate_bogoliubov_with, params_from_bogoliubov, propagate_fock_td, ModulationProfile,
    RampShape,
};
use unihalt_core::ode::Tolerances;
use unihalt_core::oscillator::{
    amplitude_aj, coherent_fock, solve_full_transfer, squeeze_amplitude, squeeze_amplitude_numeric,
    transfer_matrix, DEFAULT_TAIL_TOL,
};
use unihalt_core::protocol::{
    build_gate, conflict_bound, cycle_sequence, expected_trigger_cycle, haar_unitary, halted_probability, run_program,
};
use unihalt_core::wavepacket::{
    apply_kick, build_potential, init_gaussian, kinematics_cross_check, overlap_deficits, tunneling_slope, CycleSetup,
    KickDirection, KickSpec, SplitOperator,
};
use unihalt_core::{
    build_subspace, factorize_order, find_primitive_root, BasisLabel, CoherentLabel, CompositeSpace, FockVector,
    GateKind, GroupFactorization, HaltingLevel, LockModel, ScheduleConfig, SqueezeParams, SubspaceKind, Symbol,
    Variant, C64,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

/// Deliberate defects used to show that the suite catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Scale one column of a gate so it is no longer unitary.
    CorruptGate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub module: &'static str,
    pub invariant: &'static str,
    pub observed: String,
    pub passed: bool,
    pub seconds: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.module,
            self.invariant,
            self.observed,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub level: Level,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.failed().next().is_none()
    }
}

type Outcome = Result<(bool, String), String>;

struct Spec {
    module: &'static str,
    invariant: &'static str,
    full_only: bool,
    run: fn(&[Fault]) -> Outcome,
}

const SPECS: &[Spec] = &[
    Spec { module: "cyclic_group", invariant: "factorization multiplies back in increasing prime powers", full_only: false, run: factorization },
    Spec { module: "cyclic_group", invariant: "primitive root generates the multiplicative group", full_only: false, run: primitive_roots },
    Spec { module: "cyclic_group", invariant: "subspace shift is cyclic of order m", full_only: false, run: shift_order },
    Spec { module: "protocol_engine", invariant: "every gate is unitary", full_only: false, run: gates_unitary },
    Spec { module: "protocol_engine", invariant: "ideal lock outputs (C2, 1, blank) with probability 1 for every input", full_only: false, run: ideal_lock },
    Spec { module: "protocol_engine", invariant: "p1 + p2 <= 1 for random unitaries", full_only: false, run: conflict },
    Spec { module: "protocol_engine", invariant: "rotation-pulse leak bounded by eps^2", full_only: false, run: rotation_leak },
    Spec { module: "oscillator_analytics", invariant: "A_j equals the coherent-overlap modulus", full_only: false, run: amplitude_identity },
    Spec { module: "oscillator_analytics", invariant: "closed-form squeeze amplitude matches the Fock-space exponential", full_only: false, run: squeeze_check },
    Spec { module: "oscillator_analytics", invariant: "r = 0 full transfer has the unique root |alpha_c|", full_only: false, run: unsqueezed_root },
    Spec { module: "frequency_modulation", invariant: "Bogoliubov identity |u|^2 - |v|^2 = 1", full_only: false, run: bogoliubov_identity },
    Spec { module: "frequency_modulation", invariant: "propagator equals squeeze times rotation", full_only: false, run: factorization_fidelity },
    Spec { module: "control_kinematics", invariant: "end positions descend and arrivals ascend", full_only: false, run: orderings },
    Spec { module: "control_kinematics", invariant: "search threshold is 1 - ln p(n) / n", full_only: false, run: threshold },
    Spec { module: "wavepacket_sim", invariant: "norm and energy conserved in the static double well", full_only: false, run: conservation },
    Spec { module: "wavepacket_sim", invariant: "kick shifts <p> by hbar k and keeps the norm", full_only: false, run: kick },
    Spec { module: "wavepacket_sim", invariant: "ground packet leaks below 1e-6 over the protocol", full_only: false, run: leakage },
    Spec { module: "wavepacket_sim", invariant: "d ln T / da within 10% of -2 beta", full_only: true, run: slope },
    Spec { module: "wavepacket_sim", invariant: "arrival differences within 5% of (j - i) dT v0/v, strict ordering", full_only: true, run: cross_check },
    Spec { module: "wavepacket_sim", invariant: "overlap deficit quadratic in v0/v within a factor 2", full_only: true, run: quadratic },
];

/// Run every check of `level`, injecting `faults`.
pub fn validate_suite(level: Level, faults: &[Fault]) -> Report {
    let checks = SPECS
        .iter()
        .filter(|s| level == Level::Full || !s.full_only)
        .map(|s| {
            let t0 = Instant::now();
            let (passed, observed) = match (s.run)(faults) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            Check { module: s.module, invariant: s.invariant, observed, passed, seconds: t0.elapsed().as_secs_f64() }
        })
        .collect();
    Report { level, checks }
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn factorization(_: &[Fault]) -> Outcome {
    for n in 1..2000u64 {
        let f = factorize_order(n);
        let ok = f.iter().map(|e| e.m).product::<u64>() == n
            && f.windows(2).all(|w| w[0].m < w[1].m)
            && f.iter().all(|e| is_prime(e.prime) && e.prime.pow(e.exponent) == e.m);
        if !ok {
            return Ok((false, format!("n = {n}: {f:?}")));
        }
    }
    Ok((true, "n < 2000".into()))
}

fn primitive_roots(_: &[Fault]) -> Outcome {
    for p in (3..400u64).filter(|&p| is_prime(p)) {
        let g = find_primitive_root(p).map_err(err)?;
        let order = (1..p).find(|&k| mod_pow(g, k, p) == 1).unwrap_or(0);
        if order != p - 1 {
            return Ok((false, format!("p = {p}: g = {g} has order {order}")));
        }
    }
    Ok((true, "primes below 400".into()))
}

fn shift_order(_: &[Fault]) -> Outcome {
    let mut count = 0;
    for p in (3..200u64).filter(|&p| is_prime(p)) {
        let g = GroupFactorization::new(p).map_err(err)?;
        for k in 1..=g.r() {
            for kind in [SubspaceKind::Multiplicative, SubspaceKind::Additive] {
                let sub = build_subspace(&g, k, kind).map_err(err)?;
                for &v in sub.values() {
                    let mut x = v;
                    for step in 1..=sub.m() {
                        x = sub.apply_shift(x);
                        if (x == v) != (step == sub.m()) {
                            return Ok((false, format!("p = {p}, k = {k}, value {v}: returned after {step}")));
                        }
                    }
                }
                count += 1;
            }
        }
    }
    Ok((true, format!("{count} subspaces")))
}

fn spaces(p: u64) -> Result<Vec<CompositeSpace>, String> {
    let g = GroupFactorization::new(p).map_err(err)?;
    let mut out = Vec::new();
    for k in 1..=g.r() {
        for kind in [SubspaceKind::Multiplicative, SubspaceKind::Additive] {
            for variant in [Variant::Qc, Variant::Qh] {
                out.push(CompositeSpace::new(variant, build_subspace(&g, k, kind).map_err(err)?).map_err(err)?);
            }
        }
    }
    Ok(out)
}

fn gates_unitary(faults: &[Fault]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in [7u64, 11] {
        for s in spaces(p)? {
            let mut kinds: Vec<GateKind> = (1..=s.m()).flat_map(|c| cycle_sequence(s.variant(), c)).collect();
            kinds.dedup();
            for kind in kinds {
                let mut g = build_gate(&s, kind, &LockModel::Ideal).map_err(err)?;
                if faults.contains(&Fault::CorruptGate) && kind == GateKind::Ub {
                    g.scale_column(0, C64::new(1.01, 0.0));
                }
                worst = worst.max(g.unitarity_defect());
                count += 1;
            }
        }
    }
    Ok((worst < 1e-12, format!("{count} gates, max |U^+U - I| = {worst:.2e}")))
}

fn ideal_lock(_: &[Fault]) -> Outcome {
    let mut runs = 0;
    for p in [7u64, 11, 23] {
        for s in spaces(p)? {
            let mut cycles = Vec::new();
            for x0 in 0..s.m() {
                let run = run_program(&s, x0, &LockModel::Ideal).map_err(err)?;
                let out = (run.output.level, run.output.branch, run.output.symbol);
                let prob = halted_probability(&s, &run.final_state);
                if out != (HaltingLevel::C2, 1, Symbol::Blank) || (prob - 1.0).abs() > 1e-12 {
                    return Ok((false, format!("p = {p}, x0 = {x0}: {out:?} with probability {prob}")));
                }
                if run.trigger_cycle != Some(expected_trigger_cycle(&s, x0)) {
                    return Ok((false, format!("p = {p}, x0 = {x0}: trigger cycle {:?}", run.trigger_cycle)));
                }
                cycles.push(expected_trigger_cycle(&s, x0));
                runs += 1;
            }
            cycles.sort_unstable();
            if cycles != (1..=s.m()).collect::<Vec<_>>() {
                return Ok((false, format!("p = {p}: trigger cycles {cycles:?}")));
            }
        }
    }
    Ok((true, format!("{runs} runs for p in {{7, 11, 23}}")))
}

fn conflict(_: &[Fault]) -> Outcome {
    let g = GroupFactorization::new(3).map_err(err)?;
    let s = CompositeSpace::new(Variant::Qc, build_subspace(&g, 1, SubspaceKind::Multiplicative).map_err(err)?)
        .map_err(err)?;
    let state = |label| -> Result<DVector<C64>, String> {
        Ok(DVector::from_column_slice(s.basis_state(&label).map_err(err)?.amplitudes()))
    };
    let c1 = state(BasisLabel::new(HaltingLevel::C1, 1, Symbol::Blank, 0))?;
    let c2 = state(BasisLabel::new(HaltingLevel::C2, 1, Symbol::Blank, 1))?;
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let u = haar_unitary(s.dim(), &mut rng);
        worst = worst.max(conflict_bound(&u, &c1, &c2).map_err(err)?.sum());
    }
    Ok((worst <= 1.0 + 1e-12, format!("1000 unitaries of dim {}, max p1 + p2 = {worst:.6}", s.dim())))
}

fn rotation_leak(_: &[Fault]) -> Outcome {
    let g = GroupFactorization::new(11).map_err(err)?;
    let s = CompositeSpace::new(Variant::Qc, build_subspace(&g, 2, SubspaceKind::Multiplicative).map_err(err)?)
        .map_err(err)?;
    let mut worst: f64 = 0.0;
    for eps in [0.05, 0.1, 0.3] {
        for x0 in 0..s.m() {
            let run = run_program(&s, x0, &LockModel::rotation_pulse(eps)).map_err(err)?;
            let leak = 1.0 - halted_probability(&s, &run.final_state);
            if leak > eps * eps + 1e-12 {
                return Ok((false, format!("eps = {eps}, x0 = {x0}: leak {leak}")));
            }
            worst = worst.max(leak / (eps * eps));
        }
    }
    Ok((true, format!("max leak / eps^2 = {worst:.4}")))
}

fn amplitude_identity(_: &[Fault]) -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        for k in 0..20 {
            let n = 10.0 * i as f64 / 19.0;
            let phase = TAU * k as f64 / 19.0;
            let a = coherent_fock(C64::from_polar(n.sqrt(), 0.3), 60, DEFAULT_TAIL_TOL).map_err(err)?;
            let b = coherent_fock(C64::from_polar(n.sqrt(), 0.3 - phase), 60, DEFAULT_TAIL_TOL).map_err(err)?;
            let ov: C64 = a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum();
            worst = worst.max((amplitude_aj(n, 1.0, phase) - ov.norm()).abs());
        }
    }
    Ok((worst < 1e-10, format!("20 x 20 grid, max deviation {worst:.2e}")))
}

fn squeeze_check(_: &[Fault]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = C64::from_polar(rng.random_range(0.0..1.5), rng.random_range(0.0..TAU));
        let b = C64::from_polar(rng.random_range(0.0..1.5), rng.random_range(0.0..TAU));
        let z = C64::from_polar(rng.random_range(0.0..1.0), rng.random_range(0.0..TAU));
        let num = squeeze_amplitude_numeric(a, b, z, DEFAULT_TAIL_TOL).map_err(err)?;
        worst = worst.max((squeeze_amplitude(a, b, z) - num).norm());
    }
    Ok((worst < 1e-8, format!("20 samples, max deviation {worst:.2e}")))
}

fn unsqueezed_root(_: &[Fault]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(48);
    for _ in 0..50 {
        let ac = CoherentLabel::from_polar(rng.random_range(0.1..3.0), rng.random_range(-3.0..3.0));
        let phi_rot = rng.random_range(0.0..TAU);
        let sq = SqueezeParams::new(0.0, 0.0, phi_rot).map_err(err)?;
        let sol = solve_full_transfer(ac, ac.phase() - phi_rot, &sq).map_err(err)?;
        if sol.roots.len() != 1 || (sol.roots[0] - ac.alpha.norm()).abs() > 1e-12 {
            return Ok((false, format!("alpha_c = {}: roots {:?}", ac.alpha, sol.roots)));
        }
    }
    Ok((true, "50 labels".into()))
}

fn profiles() -> Result<Vec<ModulationProfile>, String> {
    Ok(vec![
        ModulationProfile::constant(0.7, 3.3).map_err(err)?,
        ModulationProfile::sudden_jump(0.25, 1.0, 0.8, 2.0).map_err(err)?,
        ModulationProfile::smooth_ramp(0.25, 1.0, 6.0, 1.5, RampShape::SmoothStep).map_err(err)?,
    ])
}

fn bogoliubov_identity(_: &[Fault]) -> Outcome {
    let mut worst: f64 = 0.0;
    for p in profiles()? {
        worst = worst.max(integrate_bogoliubov_with(&p, Tolerances::default()).map_err(err)?.max_defect);
    }
    Ok((worst < 1e-9, format!("max defect {worst:.2e}")))
}

fn factorization_fidelity(_: &[Fault]) -> Outcome {
    let psi = coherent_fock(C64::from_polar(1.0, 0.6), 30, 1e-14).map_err(err)?;
    let mut worst: f64 = 0.0;
    for p in profiles()? {
        let direct = propagate_fock_td(&p, &psi).map_err(err)?;
        let sq = params_from_bogoliubov(&integrate_bogoliubov(&p).map_err(err)?);
        let out = transfer_matrix(&sq, 160) * psi.resized(160).to_dvector();
        let factored = FockVector::from_dvector(&out, psi.tail_tol);
        let n = direct.amps.len().min(factored.amps.len());
        let f = (0..n).map(|k| direct.amps[k].conj() * factored.amps[k]).sum::<C64>().norm_sqr();
        worst = worst.max(1.0 - f);
    }
    Ok((worst < 1e-6, format!("max infidelity {worst:.2e}")))
}

fn orderings(_: &[Fault]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let v = rng.random_range(1.0..50.0);
        let c = ScheduleConfig {
            m_r: rng.random_range(2..10),
            dt_b: 0.1,
            dt_h: 0.1,
            dt_h2: 0.1,
            dt_r: 0.1,
            dt0: rng.random_range(0.05..0.5),
            dt_f: 0.2,
            t_d: 0.05,
            v_h: v,
            v,
            v0: rng.random_range(0.001..0.5) * v,
            ..ScheduleConfig::default()
        };
        let e = end_positions(&c).map_err(err)?;
        let a = arriving_times(&c).map_err(err)?;
        if !e.positions.windows(2).all(|w| w[1] < w[0]) || !a.times.windows(2).all(|w| w[0] < w[1]) {
            return Ok((false, format!("{c:?}")));
        }
    }
    Ok((true, "200 random schedules".into()))
}

fn threshold(_: &[Fault]) -> Outcome {
    let got = search_threshold(100, 1e4).map_err(err)?;
    let want = 1.0 - 1e4f64.ln() / 100.0;
    Ok((got == want, format!("search_threshold(100, 1e4) = {got:.17}")))
}

fn conservation(_: &[Fault]) -> Outcome {
    let s = CycleSetup::standard(0.1).map_err(err)?;
    let v = build_potential(&s.potential, &s.grid).map_err(err)?;
    let split = s.potential.barrier_center();
    let mut prop = SplitOperator::new(s.grid, v, 1.0, s.dt).map_err(err)?;
    let mut w = init_gaussian(s.grid, 1.0, 2.0, 0.0, 1.0, 0).map_err(err)?;
    let m0 = prop.measure(&w, split, None);
    prop.step(&mut w, 10_000);
    let m1 = prop.measure(&w, split, None);
    let dn = (m1.norm - m0.norm).abs();
    let de = ((m1.energy - m0.energy) / m0.energy).abs();
    Ok((dn < 1e-10 && de < 1e-6, format!("10^4 steps: norm drift {dn:.1e}, relative energy drift {de:.1e}")))
}

fn kick(_: &[Fault]) -> Outcome {
    let s = CycleSetup::standard(0.1).map_err(err)?;
    let v = build_potential(&s.potential, &s.grid).map_err(err)?;
    let window = s.potential.right_window();
    let x0 = 0.5 * (window.0 + window.1);
    let base = init_gaussian(s.grid, 1.0, x0, 10.0, 1.0, 0).map_err(err)?;
    let p0 = unihalt_core::wavepacket::measure(&base, &v, 0.0, None).mean_p;
    let mut worst: f64 = 0.0;
    for (hk, direction) in [(3.0, KickDirection::Co), (7.0, KickDirection::Counter)] {
        let mut w = base.clone();
        let spec = KickSpec { hbar_k: hk, direction, level: 0, swap: true, window };
        apply_kick(&mut w, &spec).map_err(err)?;
        let m = unihalt_core::wavepacket::measure(&w, &v, 0.0, None);
        if (m.norm - 1.0).abs() > 1e-12 {
            return Ok((false, format!("norm {}", m.norm)));
        }
        worst = worst.max(((m.mean_p - p0) / spec.signed_k() - 1.0).abs());
    }
    Ok((worst < 0.01, format!("max relative momentum error {worst:.1e}")))
}

fn leakage(_: &[Fault]) -> Outcome {
    let s = CycleSetup::standard(0.1).map_err(err)?;
    let v = build_potential(&s.potential, &s.grid).map_err(err)?;
    let mut prop = SplitOperator::new(s.grid, v, 1.0, s.dt).map_err(err)?;
    let mut w = init_gaussian(s.grid, 1.0, s.potential.center, 0.0, 1.0, 0).map_err(err)?;
    prop.step(&mut w, s.steps(s.schedule.end_time()));
    let (lo, hi) = s.potential.right_window();
    let leak = w.probability_in(lo, hi);
    Ok((leak < 1e-6, format!("beta a = {:.2}, right-well probability {leak:.1e}", s.potential.beta(0.5, 1.0) * s.potential.a)))
}

fn slope(_: &[Fault]) -> Outcome {
    let fit = tunneling_slope(1.0, 2.0, 1.0, &[3.0, 4.0, 5.0, 6.0, 7.0, 8.0], 4096).map_err(err)?;
    Ok((fit.relative_error < 0.1, format!("slope {:.4} vs {:.4}", fit.slope, fit.expected)))
}

fn cross_check(_: &[Fault]) -> Outcome {
    let cc = kinematics_cross_check(&CycleSetup::standard(0.1).map_err(err)?).map_err(err)?;
    Ok((
        cc.max_relative_error < 0.05 && cc.positions_descending && cc.arrivals_ascending,
        format!("max relative error {:.3}%", 100.0 * cc.max_relative_error),
    ))
}

fn quadratic(_: &[Fault]) -> Outcome {
    let pts = overlap_deficits(&[0.1, 0.05, 0.025], 2).map_err(err)?;
    let ratios: Vec<f64> = pts.windows(2).map(|w| w[0].deficit / w[1].deficit).collect();
    Ok((ratios.iter().all(|r| (2.0..=8.0).contains(r)), format!("halving ratios {ratios:.3?}")))
}
