//! Acceptance harness: one PASS/FAIL line per primary criterion.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unihalt_core::kinematics::search_threshold;
use unihalt_core::modulation::{
    design_modulation, integrate_bogoliubov, integrate_bogoliubov_with, params_from_bogoliubov, propagate_fock_td,
    ModulationProfile, RampShape,
};
use unihalt_core::ode::Tolerances;
use unihalt_core::oscillator::{
    amplitude_aj, coherent_fock, solve_full_transfer, squeeze_amplitude, squeeze_amplitude_numeric, transfer_matrix,
    transfer_modulus, DEFAULT_TAIL_TOL,
};
use unihalt_core::protocol::{conflict_bound, expected_trigger_cycle, haar_unitary, halted_probability, program_gates, run_with_gates};
use unihalt_core::wavepacket::{
    apply_kick, build_potential, init_gaussian, kick_train, kinematics_cross_check, measure, overlap_deficits,
    tunneling_slope, CycleSetup, KickDirection, KickSpec,
};
use unihalt_core::{
    build_subspace, BasisLabel, CoherentLabel, CompositeSpace, FockVector, GroupFactorization, HaltingLevel, LockModel,
    SqueezeParams, SubspaceKind, Symbol, Variant, C64,
};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn protocol_invariance() -> Outcome {
    let mut runs = 0;
    for p in [7u64, 11, 23] {
        let g = GroupFactorization::new(p).map_err(|e| e.to_string())?;
        for k in 1..=g.r() {
            for kind in [SubspaceKind::Multiplicative, SubspaceKind::Additive] {
                for variant in [Variant::Qc, Variant::Qh] {
                    let sub = build_subspace(&g, k, kind).map_err(|e| e.to_string())?;
                    let s = CompositeSpace::new(variant, sub).map_err(|e| e.to_string())?;
                    let gates = program_gates(&s, &LockModel::Ideal).map_err(|e| e.to_string())?;
                    let mut cycles = Vec::new();
                    for x0 in 0..s.m() {
                        let run = run_with_gates(&s, s.initial_state(x0).map_err(|e| e.to_string())?, &gates)
                            .map_err(|e| e.to_string())?;
                        let out = (run.output.level, run.output.branch, run.output.symbol);
                        let prob = halted_probability(&s, &run.final_state);
                        if out != (HaltingLevel::C2, 1, Symbol::Blank) || (prob - 1.0).abs() > 1e-12 {
                            return Err(format!("p={p} k={k} {kind:?} {variant:?} x0={x0}: {out:?} with {prob}"));
                        }
                        let cycle = run.trigger_cycle.ok_or("no trigger")?;
                        if cycle != expected_trigger_cycle(&s, x0) {
                            return Err(format!("p={p} x0={x0}: trigger cycle {cycle}"));
                        }
                        cycles.push(cycle);
                        runs += 1;
                    }
                    cycles.sort_unstable();
                    if cycles != (1..=s.m()).collect::<Vec<_>>() {
                        return Err(format!("p={p} k={k}: trigger cycles not bijective {cycles:?}"));
                    }
                }
            }
        }
    }
    Ok(format!("{runs} runs"))
}

fn unitarity_conflict() -> Outcome {
    let g = GroupFactorization::new(3).map_err(|e| e.to_string())?;
    let s = CompositeSpace::new(Variant::Qc, build_subspace(&g, 1, SubspaceKind::Multiplicative).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let vec = |label: BasisLabel| -> Result<DVector<C64>, String> {
        let st = s.basis_state(&label).map_err(|e| e.to_string())?;
        Ok(DVector::from_column_slice(st.amplitudes()))
    };
    let c1 = vec(BasisLabel::new(HaltingLevel::C1, 1, Symbol::Blank, 0))?;
    let c2 = vec(BasisLabel::new(HaltingLevel::C2, 1, Symbol::Blank, 1))?;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let u = haar_unitary(s.dim(), &mut rng);
        let r = conflict_bound(&u, &c1, &c2).map_err(|e| e.to_string())?;
        worst = worst.max(r.sum());
    }
    check(worst <= 1.0 + 1e-12, format!("dim {}, max p1+p2 = {worst:.6}", s.dim()))
}

fn fidelity_law() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        for k in 0..20 {
            let n = 10.0 * i as f64 / 19.0;
            let phase = TAU * k as f64 / 19.0;
            let alpha = C64::from_polar(n.sqrt(), 0.7);
            let n_max = 60;
            let a = coherent_fock(alpha, n_max, DEFAULT_TAIL_TOL).map_err(|e| e.to_string())?;
            let b = coherent_fock(alpha * C64::from_polar(1.0, -phase), n_max, DEFAULT_TAIL_TOL).map_err(|e| e.to_string())?;
            let ov: C64 = a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum();
            worst = worst.max((amplitude_aj(n, 1.0, phase) - ov.norm()).abs());
        }
    }
    check(worst < 1e-10, format!("max deviation {worst:.2e}"))
}

fn squeeze_amplitude_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let a = C64::from_polar(rng.random_range(0.0..1.5), rng.random_range(0.0..TAU));
        let b = C64::from_polar(rng.random_range(0.0..1.5), rng.random_range(0.0..TAU));
        let z = C64::from_polar(rng.random_range(0.0..1.0), rng.random_range(0.0..TAU));
        let num = squeeze_amplitude_numeric(a, b, z, DEFAULT_TAIL_TOL).map_err(|e| e.to_string())?;
        worst = worst.max((squeeze_amplitude(a, b, z) - num).norm());
    }
    check(worst < 1e-8, format!("50 samples, max |Δ| = {worst:.2e}"))
}

fn full_transfer_roots() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let mut worst: f64 = 0.0;
    let mut roots = 0;
    for _ in 0..20 {
        let ac = CoherentLabel::from_polar(rng.random_range(0.2..2.0), rng.random_range(-3.0..3.0));
        let phi_rot = rng.random_range(0.0..TAU);
        let gamma = ac.phase() - phi_rot;
        let sq = SqueezeParams::new(0.0, 0.0, phi_rot).map_err(|e| e.to_string())?;
        let sol = solve_full_transfer(ac, gamma, &sq).map_err(|e| e.to_string())?;
        if sol.roots.len() != 1 || (sol.roots[0] - ac.alpha.norm()).abs() > 1e-12 {
            return Err(format!("r = 0: roots {:?} for |α_c| = {}", sol.roots, ac.alpha.norm()));
        }
        worst = worst.max((transfer_modulus(ac, sol.roots[0], gamma, &sq) - 1.0).abs());
        roots += 1;
    }
    for (wc, mag, arg, gamma) in [(0.25, 1.0, 0.3, 1.0), (0.5, 0.7, -1.0, 2.0), (0.4, 1.5, 2.0, -0.5)] {
        let ac = CoherentLabel::from_polar(mag, arg);
        let d = design_modulation(wc, 1.0, ac, gamma).map_err(|e| e.to_string())?;
        let sol = solve_full_transfer(ac, gamma, &d.params).map_err(|e| e.to_string())?;
        for &b in &sol.roots {
            worst = worst.max((transfer_modulus(ac, b, gamma, &d.params) - 1.0).abs());
            roots += 1;
        }
    }
    check(worst < 1e-9, format!("{roots} roots, max |modulus - 1| = {worst:.2e}"))
}

fn factorization() -> Outcome {
    let profiles = [
        ("constant", ModulationProfile::constant(0.7, 3.3)),
        ("sudden", ModulationProfile::sudden_jump(0.25, 1.0, 0.8, 2.0)),
        ("ramp", ModulationProfile::smooth_ramp(0.25, 1.0, 6.0, 1.5, RampShape::SmoothStep)),
    ];
    let psi = coherent_fock(C64::from_polar(1.0, 0.6), 30, 1e-14).map_err(|e| e.to_string())?;
    let mut worst_f: f64 = 1.0;
    let mut worst_id: f64 = 0.0;
    for (name, p) in profiles {
        let p = p.map_err(|e| e.to_string())?;
        let direct = propagate_fock_td(&p, &psi).map_err(|e| e.to_string())?;
        let sq = params_from_bogoliubov(&integrate_bogoliubov(&p).map_err(|e| e.to_string())?);
        let out = transfer_matrix(&sq, 160) * psi.resized(160).to_dvector();
        let factored = FockVector::from_dvector(&out, psi.tail_tol);
        let n = direct.amps.len().min(factored.amps.len());
        let f = (0..n).map(|k| direct.amps[k].conj() * factored.amps[k]).sum::<C64>().norm_sqr();
        let id = integrate_bogoliubov_with(&p, Tolerances::default()).map_err(|e| e.to_string())?.max_defect;
        if f <= 1.0 - 1e-6 || id >= 1e-9 {
            return Err(format!("{name}: fidelity {f}, identity defect {id:.2e}"));
        }
        worst_f = worst_f.min(f);
        worst_id = worst_id.max(id);
    }
    Ok(format!("min fidelity 1-{:.1e}, max identity defect {worst_id:.1e}", 1.0 - worst_f))
}

fn tunneling() -> Outcome {
    let beta_a = [3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
    let fit = tunneling_slope(1.0, 2.0, 1.0, &beta_a, 4096).map_err(|e| e.to_string())?;
    check(
        fit.relative_error < 0.1,
        format!("slope {:.4} vs -2β = {:.4} ({:.2}%)", fit.slope, fit.expected, 100.0 * fit.relative_error),
    )
}

fn kick_bookkeeping() -> Outcome {
    let s = CycleSetup::standard(0.1).map_err(|e| e.to_string())?;
    let v = build_potential(&s.potential, &s.grid).map_err(|e| e.to_string())?;
    let window = s.potential.right_window();
    let x0 = 0.5 * (window.0 + window.1);
    let mut worst: f64 = 0.0;
    for hk in [0.5, 2.0, 7.5, 20.0] {
        for direction in [KickDirection::Co, KickDirection::Counter] {
            let mut w = init_gaussian(s.grid, 1.0, x0, 10.0, 1.0, 0).map_err(|e| e.to_string())?;
            let p0 = measure(&w, &v, 0.0, None).mean_p;
            let kick = KickSpec { hbar_k: hk, direction, level: 0, swap: false, window };
            apply_kick(&mut w, &kick).map_err(|e| e.to_string())?;
            let shift = measure(&w, &v, 0.0, None).mean_p - p0;
            worst = worst.max((shift / kick.signed_k() - 1.0).abs());
        }
    }
    for count in [2, 4, 8] {
        let mut w = init_gaussian(s.grid, 1.0, x0, 10.0, 1.0, 0).map_err(|e| e.to_string())?;
        let p0 = measure(&w, &v, 0.0, None).mean_p;
        for kick in kick_train(-3.0 * count as f64, count, 0, window) {
            apply_kick(&mut w, &kick).map_err(|e| e.to_string())?;
        }
        let shift = measure(&w, &v, 0.0, None).mean_p - p0;
        worst = worst.max((shift / (-3.0 * count as f64) - 1.0).abs());
    }
    check(worst < 0.01, format!("max relative error {worst:.2e}"))
}

fn kinematics() -> Outcome {
    let setup = CycleSetup::standard(0.1).map_err(|e| e.to_string())?;
    let cc = kinematics_cross_check(&setup).map_err(|e| e.to_string())?;
    let cycles: Vec<usize> = cc.records.iter().map(|r| r.cycle).collect();
    check(
        cycles == [1, 2, 3, 4] && cc.max_relative_error < 0.05 && cc.positions_descending && cc.arrivals_ascending,
        format!(
            "m_r = {}, max relative error {:.3}%, R descending {}, T ascending {}",
            cycles.len(),
            100.0 * cc.max_relative_error,
            cc.positions_descending,
            cc.arrivals_ascending
        ),
    )
}

fn quadratic_trend() -> Outcome {
    let pts = overlap_deficits(&[0.1, 0.05, 0.025], 2).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = pts.windows(2).map(|w| w[0].deficit / w[1].deficit).collect();
    let ok = ratios.iter().all(|r| (2.0..=8.0).contains(r));
    let deficits: Vec<String> = pts.iter().map(|p| format!("{:.4}", p.deficit)).collect();
    check(ok, format!("deficits [{}], halving ratios {:?} (want 4 within x2)", deficits.join(", "), ratios))
}

fn threshold() -> Outcome {
    let got = search_threshold(100, 1e4).map_err(|e| e.to_string())?;
    let want = 1.0 - 1e4f64.ln() / 100.0;
    check(got == want, format!("{got:.17} vs {want:.17}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 11] = [
        ("protocol invariance", protocol_invariance, Duration::from_secs(1)),
        ("unitarity conflict", unitarity_conflict, Duration::from_secs(5)),
        ("coherent fidelity law", fidelity_law, Duration::from_secs(10)),
        ("squeeze amplitude", squeeze_amplitude_check, Duration::from_secs(30)),
        ("full-transfer roots", full_transfer_roots, Duration::MAX),
        ("squeeze-rotation factorization", factorization, Duration::MAX),
        ("tunneling slope", tunneling, Duration::from_secs(300)),
        ("kick bookkeeping", kick_bookkeeping, Duration::MAX),
        ("kinematics cross-check", kinematics, Duration::from_secs(600)),
        ("quadratic trend", quadratic_trend, Duration::MAX),
        ("threshold arithmetic", threshold, Duration::MAX),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let t0 = Instant::now();
        let outcome = run();
        let elapsed = t0.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget {budget:?}")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!("{} {name}: {detail} [{:.2}s]", if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
