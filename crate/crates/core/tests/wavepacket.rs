use std::f64::consts::PI;

use unihalt_core::wavepacket::{
    apply_kick, build_potential, evolve, init_gaussian, kick_train, measure, run_cycles, square_barrier_transmission,
    transmission_scan, CycleSetup, KickDirection, KickSpec, SplitOperator, Stage, LOCKED_RIGHT,
};
use unihalt_core::{Grid1D, PotentialSpec, WaveError};

fn harmonic(grid: &Grid1D) -> Vec<f64> {
    grid.xs().into_iter().map(|x| 0.5 * x * x).collect()
}

fn standard() -> CycleSetup {
    CycleSetup::standard(0.1).unwrap()
}

#[test]
fn potential_samples() {
    let spec = PotentialSpec { k_spring: 2.0, center: 1.0, v0: 9.0, a: 0.5, floor_length: 4.0, left_extent: 6.0 };
    assert_eq!(spec.value(1.0), 0.0);
    assert!((spec.value(1.0 + 1.7) - 0.5 * 2.0 * 1.7 * 1.7).abs() < 1e-12);
    assert_eq!(spec.value(1.0 - 2.5), 0.5 * 2.0 * 2.5 * 2.5);
    // Flank reaches V0 at d = 3.
    assert_eq!(spec.barrier_start(), 4.0);
    assert_eq!(spec.value(4.2), 9.0);
    assert_eq!(spec.value(4.6), 0.0);
    assert_eq!(spec.value(8.6), spec.pad_height());
    assert_eq!(spec.value(-5.1), spec.pad_height());
    let grid = Grid1D::new(-8.0, 12.0, 1024).unwrap();
    let v = build_potential(&spec, &grid).unwrap();
    for (x, vx) in grid.xs().into_iter().zip(&v) {
        assert_eq!(*vx, spec.value(x));
    }
    let tight = Grid1D::new(-5.05, 12.0, 1024).unwrap();
    assert!(matches!(build_potential(&spec, &tight), Err(WaveError::Geometry(_))));
}

#[test]
fn gaussian_moments() {
    let grid = Grid1D::new(-20.0, 20.0, 1024).unwrap();
    let v = harmonic(&grid);
    let w = init_gaussian(grid, 1.0, 1.3, -2.0, 1.0, 0).unwrap();
    let m = measure(&w, &v, 0.0, Some(&w));
    assert!((m.norm - 1.0).abs() < 1e-12);
    assert!((m.mean_x - 1.3).abs() < grid.dx());
    assert!((m.mean_p + 2.0).abs() < 2.0 * PI / grid.length());
    assert!((m.overlap.unwrap() - 1.0).abs() < 1e-12);
    assert!((m.p_left + m.p_right - m.norm).abs() < 1e-12);
    // Ground state of the unit oscillator: sigma = 1, energy 1/2.
    let g = init_gaussian(grid, 1.0, 0.0, 0.0, 1.0, 1).unwrap();
    let m = measure(&g, &v, 5.0, None);
    assert!((m.energy - 0.5).abs() < 1e-8);
    assert!(m.mean_p.abs() < 1e-12);
    assert_eq!(m.level_population[0], 0.0);
    assert!((m.level_population[1] - 1.0).abs() < 1e-12);
    assert!(m.p_left > 1.0 - 1e-6);
    assert!(matches!(init_gaussian(grid, 1.0, 17.0, 0.0, 1.0, 0), Err(WaveError::Support(_))));
    assert!(matches!(init_gaussian(grid, 1.0, 0.0, 0.0, 0.2, 0), Err(WaveError::Grid(_))));
}

#[test]
fn symmetric_packet_splits_evenly() {
    let s = standard();
    // Midway between two grid points so the samples are mirror images.
    let i = s.grid.range(s.potential.barrier_center(), s.grid.x_max).start;
    let split = s.grid.x(i) + 0.5 * s.grid.dx();
    let v = build_potential(&s.potential, &s.grid).unwrap();
    let w = init_gaussian(s.grid, 1.0, split, 0.0, 0.5, 0).unwrap();
    let m = measure(&w, &v, split, None);
    assert!((m.p_left - m.p_right).abs() < 1e-3);
}

#[test]
fn free_spreading_law() {
    let grid = Grid1D::new(-40.0, 40.0, 1024).unwrap();
    let zero = vec![0.0; grid.n];
    let (sigma, mass) = (1.0, 1.0);
    let w = init_gaussian(grid, mass, 0.0, 0.0, sigma, 0).unwrap();
    let dt = 5e-4;
    let t = 3.0;
    let out = evolve(&w, &zero, dt, (t / dt) as usize).unwrap();
    let s0 = measure(&w, &zero, 0.0, None).spread;
    let s1 = measure(&out, &zero, 0.0, None).spread;
    // Position std of |ψ|² grows as sqrt(1 + (t / (m σ²))²).
    let oracle = s0 * (1.0 + (t / (mass * sigma * sigma)).powi(2)).sqrt();
    assert!((s0 - sigma / 2f64.sqrt()).abs() < 1e-6);
    assert!((s1 / oracle - 1.0).abs() < 0.01, "{s1} vs {oracle}");
}

#[test]
fn harmonic_oscillation_frequency() {
    let grid = Grid1D::new(-16.0, 16.0, 256).unwrap();
    let v = harmonic(&grid);
    let mut w = init_gaussian(grid, 1.0, 3.0, 0.0, 1.0, 0).unwrap();
    let dt = 1e-3;
    let mut prop = SplitOperator::new(grid, v.clone(), 1.0, dt).unwrap();
    let mut crossings = Vec::new();
    let mut last = 3.0;
    for s in 1..=13_000 {
        prop.step(&mut w, 1);
        let x = w.mean_x();
        let t = s as f64 * dt;
        assert!((x - 3.0 * t.cos()).abs() < 0.03, "t = {t}");
        if last > 0.0 && x <= 0.0 || last < 0.0 && x >= 0.0 {
            crossings.push(t - dt * x / (x - last));
        }
        last = x;
    }
    // Zero crossings are half a period apart.
    let period = 2.0 * (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
    assert!((period / (2.0 * PI) - 1.0).abs() < 0.01, "{period}");
}

#[test]
fn zero_steps_and_stability() {
    let grid = Grid1D::new(-16.0, 16.0, 256).unwrap();
    let v = harmonic(&grid);
    let w = init_gaussian(grid, 1.0, 1.0, 1.0, 1.0, 0).unwrap();
    assert_eq!(evolve(&w, &v, 1e-3, 0).unwrap(), w);
    assert!(matches!(evolve(&w, &v, 1.0, 1), Err(WaveError::Stability { .. })));
}

#[test]
fn norm_and_energy_are_conserved_in_the_double_well() {
    let s = standard();
    let v = build_potential(&s.potential, &s.grid).unwrap();
    let split = s.potential.barrier_center();
    let mut prop = SplitOperator::new(s.grid, v, 1.0, s.dt).unwrap();
    // Ground packet and a coherent state swinging with amplitude 2.
    for x0 in [0.0, 2.0] {
        let mut w = init_gaussian(s.grid, 1.0, x0, 0.0, 1.0, 0).unwrap();
        let e0 = prop.measure(&w, split, None).energy;
        for _ in 0..5 {
            prop.step(&mut w, 2000);
            let m = prop.measure(&w, split, None);
            assert!((m.norm - 1.0).abs() < 1e-10);
            assert!(((m.energy - e0) / e0).abs() < 1e-6, "x0 {x0}: {} vs {e0}", m.energy);
        }
    }
}

#[test]
fn ground_packet_does_not_tunnel() {
    let s = standard();
    let v = build_potential(&s.potential, &s.grid).unwrap();
    let beta = s.potential.beta(0.5, 1.0);
    assert!(beta * s.potential.a >= 8.0);
    let mut w = init_gaussian(s.grid, 1.0, s.potential.center, 0.0, 1.0, 0).unwrap();
    let steps = s.steps(s.schedule.end_time());
    let mut prop = SplitOperator::new(s.grid, v, 1.0, s.dt).unwrap();
    let (lo, hi) = s.potential.right_window();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        prop.step(&mut w, steps / 10 + 1);
        worst = worst.max(w.probability_in(lo, hi));
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn wells_are_orthogonal() {
    let s = standard();
    let left = init_gaussian(s.grid, 1.0, s.potential.center, 0.0, 1.0, 0).unwrap();
    let (lo, hi) = s.potential.right_window();
    let mut worst: f64 = 0.0;
    for k in 0..5 {
        let x = lo + 5.0 + k as f64 * (hi - lo - 10.0) / 4.0;
        let right = init_gaussian(s.grid, 1.0, x, 30.0, 1.0, 0).unwrap();
        let sep = x - s.potential.center;
        let ov = left.inner(&right).norm();
        assert!(ov < (-(sep * sep) / 4.0).exp());
        worst = worst.max(ov);
    }
    assert!(worst < 1e-6);
}

#[test]
fn kicks_shift_momentum() {
    let s = standard();
    let v = build_potential(&s.potential, &s.grid).unwrap();
    let window = s.potential.right_window();
    let x0 = 0.5 * (window.0 + window.1);
    let base = init_gaussian(s.grid, 1.0, x0, 3.0, 1.0, 0).unwrap();
    let p0 = measure(&base, &v, 0.0, None).mean_p;

    let mut w = base.clone();
    apply_kick(&mut w, &KickSpec { hbar_k: 5.0, direction: KickDirection::Counter, level: 0, swap: false, window }).unwrap();
    let m = measure(&w, &v, 0.0, None);
    assert!(((m.mean_p - p0) + 5.0).abs() < 0.05);
    assert!((m.norm - 1.0).abs() < 1e-14);

    // Raman pair with level swap: ħk_A + ħk_B and the packet changes level.
    let mut w = base.clone();
    apply_kick(&mut w, &KickSpec { hbar_k: 3.0, direction: KickDirection::Co, level: 0, swap: true, window }).unwrap();
    apply_kick(&mut w, &KickSpec { hbar_k: 4.0, direction: KickDirection::Co, level: 1, swap: false, window }).unwrap();
    let m = measure(&w, &v, 0.0, None);
    assert!(((m.mean_p - p0) - 7.0).abs() < 0.07);
    assert!((m.level_population[1] - 1.0).abs() < 1e-12);

    // A train of k kicks moves by k ħk.
    let mut w = base.clone();
    for kick in kick_train(-12.0, 4, 0, window) {
        assert_eq!(kick.hbar_k, 3.0);
        apply_kick(&mut w, &kick).unwrap();
    }
    assert!(((measure(&w, &v, 0.0, None).mean_p - p0) + 12.0).abs() < 0.12);

    // Window away from the packet.
    let mut w = base.clone();
    let far = (s.potential.left_wall(), s.potential.center);
    apply_kick(&mut w, &KickSpec { hbar_k: 5.0, direction: KickDirection::Co, level: 0, swap: true, window: far }).unwrap();
    // Only the far Gaussian tail sits inside the window; nothing else moves.
    let tail = s.grid.range(far.0, far.1).map(|i| base.levels[0][i].norm()).fold(0.0, f64::max);
    let moved = (0..2)
        .flat_map(|l| w.levels[l].iter().zip(&base.levels[l]).map(|(a, b)| (a - b).norm()))
        .fold(0.0, f64::max);
    assert!(tail < 1e-100 && moved <= tail, "{moved} {tail}");
    for i in s.grid.range(far.1, s.grid.x_max) {
        assert_eq!(w.levels[0][i], base.levels[0][i]);
    }

    let outside = (s.grid.x_min - 1.0, 0.0);
    let bad = KickSpec { hbar_k: 1.0, direction: KickDirection::Co, level: 0, swap: false, window: outside };
    assert!(apply_kick(&mut w, &bad).is_err());
}

#[test]
fn transmission_limits() {
    let free = transmission_scan(1.0, 0.0, 1.0, 1.0).unwrap();
    assert!((free.t_numeric - 1.0).abs() < 1e-3);
    let high = transmission_scan(50.0, 1.0, 1.0, 1.0).unwrap();
    assert!((high.t_numeric - 1.0).abs() < 0.02);
    assert!((high.t_analytic - square_barrier_transmission(50.0, 1.0, high.a, 1.0)).abs() < 1e-15);
    let tunnel = transmission_scan(1.0, 2.0, 1.5, 1.0).unwrap();
    assert!((tunnel.t_numeric / tunnel.t_analytic - 1.0).abs() < 0.1, "{tunnel:?}");
}

#[test]
fn square_barrier_oracle() {
    // Closed form evaluated independently: T = 1 / (1 + V0² sinh²(βa) / (4E(V0 - E))).
    let (e, v0, a) = (1.0f64, 2.0f64, 1.5f64);
    let beta = (2.0 * (v0 - e)).sqrt();
    let t = 1.0 / (1.0 + v0 * v0 * (beta * a).sinh().powi(2) / (4.0 * e * (v0 - e)));
    assert!((square_barrier_transmission(e, v0, a, 1.0) - t).abs() < 1e-14);
    assert_eq!(square_barrier_transmission(e, 0.0, a, 1.0), 1.0);
}

#[test]
fn single_cycle_record() {
    let s = standard();
    let recs = run_cycles(&s, &[2]).unwrap();
    let r = &recs[0];
    assert_eq!(r.cycle, 2);
    assert!((r.final_overlap.unwrap() - 1.0).abs() < 1e-8);
    assert!(r.trigger_time < r.decel_time && r.decel_time < r.bounce_time && r.bounce_time < r.arrival_time);
    let locked = r.stage(Stage::Locked).unwrap();
    assert!(locked.measurement.p_right > LOCKED_RIGHT);
    assert!((locked.measurement.norm - 1.0).abs() < 1e-8);
    assert!(r.samples.windows(2).all(|w| w[0].t < w[1].t));
    let start = r.stage(Stage::Start).unwrap();
    assert!(start.measurement.p_left > 1.0 - 1e-6);
}
