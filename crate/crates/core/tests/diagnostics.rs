use std::f64::consts::PI;

use maxlab_core::diagnostics::{
    admissible, bootstrap_functionals, differentiated_residual, energy_m, helmholtz_ratio, strichartz_ratio, HelmholtzMode,
    History, Medium,
};
use maxlab_core::evolution::presets::{random_state, standing_wave, CoefficientPreset, DataKind};
use maxlab_core::evolution::{charge, Integrator, LinearMaxwell};
use maxlab_core::field::{FieldState, ScalarField};
use maxlab_core::ops::gradient;
use maxlab_core::{CoefficientSet, MaxlabError, TorusGrid};
use proptest::prelude::*;

fn run(solver: &LinearMaxwell, u0: &FieldState, dt: f64, steps: usize) -> Vec<FieldState> {
    let mut out = vec![u0.clone()];
    solver
        .evolve(u0, dt, steps, Integrator::Leapfrog, |_, s| {
            out.push(s.clone());
            Ok(())
        })
        .unwrap();
    out
}

#[test]
fn a1_is_constant_on_flat_linear_runs() {
    let g = TorusGrid::cube(2, 32, 2.0 * PI).unwrap();
    let c = CoefficientSet::flat(&g);
    let solver = LinearMaxwell::new(&c).unwrap();
    let u0 = random_state(&g, &c, 3, 0.0, 6.0, DataKind::DivergenceFree).unwrap();
    let dt = 0.02;
    let mut h = History::new(dt, run(&solver, &u0, dt, 40)).unwrap();
    h.solver_dt = Some(dt);
    let rows = bootstrap_functionals(&h, &Medium::Linear(&solver)).unwrap();
    let a0 = rows[0].a1;
    for r in &rows {
        assert!((r.a1 / a0 - 1.0).abs() < 1e-6, "{}", r.a1 / a0);
        assert!(r.a2 >= r.a1);
    }
    assert!(differentiated_residual(&h, &solver).unwrap() < 2e-3);
}

#[test]
fn zero_state_has_zero_functionals() {
    let g = TorusGrid::cube(2, 8, 1.0).unwrap();
    let h = History::new(0.1, vec![FieldState::zeros(&g); 8]).unwrap();
    let rows = bootstrap_functionals(&h, &Medium::Kerr).unwrap();
    assert!(rows.iter().all(|r| r.a1 == 0.0 && r.a2 == 0.0));
}

#[test]
fn energy_of_a_single_mode() {
    // H = a cos(x1) cos(x2): int H^2 over the torus = a^2 (2 pi)^2 / 4, halved for the half space
    let g = TorusGrid::cube(2, 16, 2.0 * PI).unwrap();
    let a = 0.7;
    let h = ScalarField::from_fn(&g, |x| a * x[0].cos() * x[1].cos());
    let s = FieldState::new(0.0, vec![ScalarField::zeros(&g), ScalarField::zeros(&g)], vec![h]).unwrap();
    let want = 0.5 * a * a * (2.0 * PI).powi(2) / 4.0;
    assert!((energy_m(&s, &CoefficientSet::flat(&g)).unwrap() - want).abs() < 1e-12 * want);
    assert_eq!(energy_m(&FieldState::zeros(&g), &CoefficientSet::flat(&g)).unwrap(), 0.0);
}

#[test]
fn standing_wave_energy_ratio_is_at_most_one() {
    let g = TorusGrid::cube(2, 32, 2.0 * PI).unwrap();
    let solver = LinearMaxwell::new(&CoefficientSet::flat(&g)).unwrap();
    let u0 = standing_wave(&g, [1, 2], 0.0).unwrap();
    let hist = run(&solver, &u0, 0.01, 100);
    let t = admissible(f64::INFINITY, 2.0, 2).unwrap();
    assert_eq!(t.gamma, 0.0);
    let rho0 = charge(&u0, solver.coeffs());
    let m = strichartz_ratio(&hist, &t, &rho0).unwrap();
    // E + H energy is constant and u(0) is a single mode with |xi|^2 = 5, so the
    // ratio is <xi>^{-delta} up to the O(dt^2) leapfrog energy defect
    let want = 6f64.powf(-t.delta / 2.0);
    assert!((m.ratio - want).abs() < 1e-3 * want, "{} vs {want}", m.ratio);
    assert!(m.ratio <= 1.0);
}

#[test]
fn helmholtz_ratio_of_a_gradient_field() {
    let g = TorusGrid::cube(2, 32, 2.0 * PI).unwrap();
    let phi = ScalarField::from_fn(&g, |x| (2.0 * x[0] + x[1]).sin());
    let r = helmholtz_ratio(&gradient(&phi), 1.0, HelmholtzMode::Torus).unwrap();
    assert!(r.identity_residual.unwrap() < 1e-12);
    assert!(r.ratio > 0.3 && r.ratio <= 1.0);
}

#[test]
fn helmholtz_half_mode_rejects_tangential_trace() {
    let g = TorusGrid::cube(2, 16, 2.0 * PI).unwrap();
    let e = vec![ScalarField::from_fn(&g, |x| x[1].cos()), ScalarField::zeros(&g)];
    assert!(matches!(helmholtz_ratio(&e, 0.0, HelmholtzMode::Half), Err(MaxlabError::Compatibility(_))));
}

#[test]
fn variable_medium_history_solves_differentiated_system() {
    let g = TorusGrid::cube(2, 32, 2.0 * PI).unwrap();
    let c = CoefficientPreset::Geodesic { amplitude: 0.3 }.build(&g).unwrap();
    let solver = LinearMaxwell::new(&c).unwrap();
    let u0 = random_state(&g, &c, 4, 0.0, 5.0, DataKind::Charged).unwrap();
    // leapfrog histories satisfy the differentiated system to O(dt^2)
    let res: Vec<f64> = [0.01, 0.005]
        .iter()
        .map(|&dt| {
            let h = History::new(dt, run(&solver, &u0, dt, (0.1 / dt).round() as usize)).unwrap();
            differentiated_residual(&h, &solver).unwrap()
        })
        .collect();
    assert!(res[0] < 1e-3, "{res:?}");
    assert!((res[0] / res[1] / 4.0 - 1.0).abs() < 0.1, "{res:?}");
}

proptest! {
    // the accepted (1/p, 1/q) set is convex: midpoints of accepted pairs are accepted
    #[test]
    fn admissible_region_is_convex(a in 0u32..=12, b in 2u32..=12, c in 0u32..=12, d in 2u32..=12, dim in 2usize..=3) {
        let pt = |i: u32, j: u32| (i as f64 / 24.0, j as f64 / 24.0);
        let (x0, y0) = pt(a, b);
        let (x1, y1) = pt(c, d);
        let ok = |x: f64, y: f64| admissible(1.0 / x, 1.0 / y, dim).is_ok();
        if ok(x0, y0) && ok(x1, y1) {
            prop_assert!(ok(0.5 * (x0 + x1), 0.5 * (y0 + y1)));
        }
    }
}

#[test]
fn admissible_lattice_matches_the_inequalities() {
    for i in 0..=12 {
        for j in 1..=12 {
            let (x, y) = (i as f64 / 24.0, j as f64 / 24.0);
            let three = 3.0 * x + 2.0 * y <= 1.0 + 1e-12;
            let two = 3.0 * x + y <= 0.5 + 1e-12;
            assert_eq!(admissible(1.0 / x, 1.0 / y, 3).is_ok(), three, "({x}, {y})");
            assert_eq!(admissible(1.0 / x, 1.0 / y, 2).is_ok(), two, "({x}, {y})");
        }
    }
}

