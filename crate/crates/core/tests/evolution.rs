use std::f64::consts::PI;

use maxlab_core::evolution::kerr::{displacement, effective_permittivity, invert_constitutive, kerr_root, KerrMaxwell};
use maxlab_core::evolution::presets::{random_state, standing_wave, symmetrize, CoefficientPreset, DataKind};
use maxlab_core::evolution::{charge, check_cfl, EvolutionConfig, Integrator, LinearMaxwell, Nonlinearity};
use maxlab_core::field::{FieldState, Parity, ScalarField};
use maxlab_core::ops::gradient;
use maxlab_core::{CoefficientSet, MaxlabError, TorusGrid};
use nalgebra::Matrix2;
use proptest::prelude::*;

/// Root of `e + e^3 = d` by bisection.
fn bisect(d: f64) -> f64 {
    let (mut lo, mut hi) = (-d.abs() - 1.0, d.abs() + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid + mid * mid * mid < d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

proptest! {
    #[test]
    fn kerr_root_matches_bisection(d in 0.0f64..50.0) {
        let e = kerr_root(d);
        let want = bisect(d);
        prop_assert!((e - want).abs() <= 1e-12 * want.abs().max(1.0), "{e} {want}");
    }

    #[test]
    fn constitutive_round_trip(d1 in -5.0f64..5.0, d2 in -5.0f64..5.0) {
        let g = TorusGrid::cube(2, 4, 1.0).unwrap();
        let d = vec![ScalarField::constant(&g, d1), ScalarField::constant(&g, d2)];
        let e = invert_constitutive(&d).unwrap();
        let back = displacement(&e);
        for (a, b) in back.iter().zip(&d) {
            prop_assert!((a.values()[0] - b.values()[0]).abs() <= 1e-12 * b.max_abs().max(1.0));
        }
    }

    // eigenvalues 1 + 3|E|^2 along E and 1 + |E|^2 across it
    #[test]
    fn permittivity_eigen_decomposition(e1 in -2.0f64..2.0, e2 in -2.0f64..2.0) {
        let g = TorusGrid::cube(2, 4, 1.0).unwrap();
        let e = vec![ScalarField::constant(&g, e1), ScalarField::constant(&g, e2)];
        let t = effective_permittivity(&e).at2(0);
        let i2 = e1 * e1 + e2 * e2;
        let mut ev: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        prop_assert!((ev[0] - (1.0 + i2)).abs() < 1e-12 * (1.0 + i2));
        prop_assert!((ev[1] - (1.0 + 3.0 * i2)).abs() < 1e-12 * (1.0 + 3.0 * i2));
    }
}

#[test]
fn permittivity_example() {
    let g = TorusGrid::cube(2, 4, 1.0).unwrap();
    let e = vec![ScalarField::constant(&g, 1.0), ScalarField::zeros(&g)];
    assert_eq!(effective_permittivity(&e).at2(3), Matrix2::new(4.0, 0.0, 0.0, 2.0));
}

fn standing_wave_error(dim: usize, n: usize, integrator: Integrator) -> f64 {
    let g = TorusGrid::cube(dim, n, 2.0 * PI).unwrap();
    let solver = LinearMaxwell::new(&CoefficientSet::flat(&g)).unwrap();
    let u0 = standing_wave(&g, [2, 3], 0.0).unwrap();
    let steps = 400;
    let t = 1.0;
    let end = solver.evolve(&u0, t / steps as f64, steps, integrator, |_, _| Ok(())).unwrap();
    let exact = standing_wave(&g, [2, 3], t).unwrap();
    end.max_diff(&exact) / exact.max_abs().max(u0.max_abs())
}

#[test]
fn standing_waves_follow_the_dispersion_relation() {
    assert!(standing_wave_error(2, 32, Integrator::Rk4) < 1e-9);
    assert!(standing_wave_error(3, 16, Integrator::Rk4) < 1e-9);
    // leapfrog phase error is O((w dt)^2)
    assert!(standing_wave_error(2, 32, Integrator::Leapfrog) < 1e-3);
}

#[test]
fn leapfrog_is_second_order() {
    let g = TorusGrid::cube(2, 32, 2.0 * PI).unwrap();
    let coeffs = CoefficientPreset::Smooth { amplitude: 0.3 }.build(&g).unwrap();
    let solver = LinearMaxwell::new(&coeffs).unwrap();
    let u0 = random_state(&g, &coeffs, 2, 0.0, 5.0, DataKind::General).unwrap();
    let run = |k: usize| solver.evolve(&u0, 0.5 / k as f64, k, Integrator::Leapfrog, |_, _| Ok(())).unwrap();
    let (a, b, c) = (run(40), run(80), run(160));
    let ratio = a.max_diff(&b) / b.max_diff(&c);
    assert!((ratio / 4.0 - 1.0).abs() < 0.15, "{ratio}");
}

#[test]
fn gradient_displacement_has_laplacian_charge() {
    let g = TorusGrid::cube(2, 32, 2.0 * PI).unwrap();
    let phi = symmetrize(&ScalarField::from_fn(&g, |x| (2.0 * x[1]).sin() * x[0].cos()), Parity::Odd);
    let e = gradient(&phi);
    let s = FieldState::new(0.0, e, vec![ScalarField::zeros(&g)]).unwrap();
    let rho = charge(&s, &CoefficientSet::flat(&g));
    let lap = ScalarField::from_fn(&g, |x| -5.0 * (2.0 * x[1]).sin() * x[0].cos());
    assert!(rho.zip_with(&lap, |a, b| a - b).max_abs() < 1e-11);
}

#[test]
fn kerr_charge_is_constant_per_step() {
    let g = TorusGrid::cube(2, 32, 2.0 * PI).unwrap();
    let u0 = random_state(&g, &CoefficientSet::flat(&g), 4, 0.0, 6.0, DataKind::General).unwrap();
    let kerr = KerrMaxwell::new(&g);
    let rho0 = kerr.charge(&u0);
    let scale = rho0.max_abs();
    let dt = 0.3 * g.min_spacing();
    kerr.evolve(&u0, dt, 60, Integrator::Leapfrog, |_, s| {
        assert!(kerr.charge(s).zip_with(&rho0, |a, b| a - b).max_abs() <= 1e-10 * scale);
        Ok(())
    })
    .unwrap();
}

#[test]
fn kerr_hamiltonian_is_nearly_conserved() {
    let g = TorusGrid::cube(2, 32, 2.0 * PI).unwrap();
    let u0 = random_state(&g, &CoefficientSet::flat(&g), 6, 0.0, 4.0, DataKind::General).unwrap();
    let kerr = KerrMaxwell::new(&g);
    let h0 = kerr.hamiltonian(&u0);
    let run = |k: usize| {
        let end = kerr.evolve(&u0, 0.5 / k as f64, k, Integrator::Rk4, |_, _| Ok(())).unwrap();
        (kerr.hamiltonian(&end) - h0).abs() / h0
    };
    assert!(run(200) < 1e-6);
}

#[test]
fn cfl_violations_are_rejected() {
    let g = TorusGrid::cube(2, 32, 2.0 * PI).unwrap();
    assert!(matches!(check_cfl(&g, 1.0, 1.0, Integrator::Leapfrog), Err(MaxlabError::Cfl { .. })));
    assert!(check_cfl(&g, 1.0, 0.05, Integrator::Leapfrog).is_ok());
    let bad = EvolutionConfig { nonlinearity: Nonlinearity::Kerr2d, ..EvolutionConfig::default() };
    assert!(bad.validate(3).is_err());
}

#[test]
fn forcing_must_respect_the_parity_plan() {
    let g = TorusGrid::cube(2, 16, 2.0 * PI).unwrap();
    let solver = LinearMaxwell::new(&CoefficientSet::flat(&g)).unwrap();
    // even tangential current is not allowed
    let j = vec![ScalarField::constant(&g, 1.0), ScalarField::zeros(&g)];
    assert!(solver.with_forcing(j).is_err());
}
