use maxlab_core::symbol::curl::{adjugate, curl_symbol};
use maxlab_core::symbol::maxwell2d::{conjugation_2d, maxwell_symbol_2d, Local2};
use maxlab_core::symbol::maxwell3d::{
    conjugation_3d, eigenvalues, maxwell_symbol_3d, orthonormal_eigenbasis, Local3, BRANCH_CUTOFF,
};
use maxlab_core::symbol::{maxwell_symbol, quantize, QUANTIZE_GUARD};
use maxlab_core::{CoefficientSet, MaxlabError, ScalarField, TorusGrid};
use maxlab_core::evolution::presets::CoefficientPreset;
use maxlab_core::ops::apply_multiplier;
use nalgebra::{Matrix2, Matrix3, Matrix6, Vector2, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;

fn unit(v: [f64; 3]) -> Option<Vector3<f64>> {
    let w = Vector3::from(v);
    let n = w.norm();
    (n > 1e-2).then(|| w / n)
}

proptest! {
    #[test]
    fn adjugate_times_matrix_is_determinant(b in prop::array::uniform9(-2.0f64..2.0)) {
        let m = Matrix3::from_row_slice(&b);
        let lhs = adjugate(&m) * m;
        prop_assert!((lhs - Matrix3::identity() * m.determinant()).norm() < 1e-12);
    }

    // flat medium: the symbol is i times a symmetric matrix whose spectrum is
    // {xi0, xi0, xi0 +- |xi|, xi0 +- |xi|}; checked against a dense eigen solve
    #[test]
    fn flat_spectrum_matches_dense_solve(v in prop::array::uniform3(-3.0f64..3.0), xi0 in -3.0f64..3.0) {
        let xi = Vector3::from(v);
        prop_assume!(xi.norm() > 1e-3);
        let p = maxwell_symbol_3d(&Local3::flat(), xi0, &xi).map(|z| z.im);
        let mut dense: Vec<f64> = p.symmetric_eigenvalues().iter().copied().collect();
        let mut ours = eigenvalues(xi0, xi.norm()).to_vec();
        dense.sort_by(f64::total_cmp);
        ours.sort_by(f64::total_cmp);
        for (a, b) in dense.iter().zip(&ours) {
            prop_assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn orthonormal_columns_are_eigenvectors(v in prop::array::uniform3(-1.0f64..1.0), branch in 0usize..3) {
        let w = unit(v);
        prop_assume!(w.is_some());
        let w = w.unwrap();
        prop_assume!(w[branch].abs() >= BRANCH_CUTOFF);
        let m = orthonormal_eigenbasis(&w, branch);
        prop_assert!((m.transpose() * m - Matrix6::identity()).norm() < 1e-12);
        // flat symbol at xi0 = 0 and |xi| = 1
        let p = maxwell_symbol_3d(&Local3::flat(), 0.0, &w).map(|z| z.im);
        let ev = eigenvalues(0.0, 1.0);
        for j in 0..6 {
            let col = m.column(j);
            prop_assert!((p * col - col * ev[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn symbol_is_homogeneous_of_degree_one(t in 0.1f64..10.0, v in prop::array::uniform3(-2.0f64..2.0)) {
        let g = TorusGrid::cube(3, 8, 6.0).unwrap();
        let c = CoefficientPreset::Geodesic { amplitude: 0.3 }.build(&g).unwrap();
        let s = maxwell_symbol(&c);
        prop_assert!(s.homogeneity_defect(17, 0.7, &v, t) < 1e-11 * t.max(1.0));
    }
}

#[test]
fn conjugation_at_variable_points() {
    let g = TorusGrid::cube(3, 8, 6.0).unwrap();
    let c = CoefficientPreset::Geodesic { amplitude: 0.4 }.build(&g).unwrap();
    for p in [0, 5, 100, 333, 511] {
        let loc = Local3::from_coeffs(&c, p);
        for branch in 0..3 {
            let mut xi = Vector3::new(0.3, -0.2, 0.25);
            xi[branch] = 2.0;
            let conj = conjugation_3d(&loc, 1.3, &xi, branch, BRANCH_CUTOFF).unwrap();
            let r = (maxwell_symbol_3d(&loc, 1.3, &xi) - conj.product()).norm();
            assert!(r < 1e-12, "point {p} branch {branch}: {r}");
            assert!(conj.orthonormality_defect() < 1e-13);
        }
    }
}

#[test]
fn two_dimensional_conjugation_and_negative_control() {
    let loc = Local2 { eps: Matrix2::new(1.4, 0.2, 0.2, 0.9), mu: 1.1 };
    let xi = Vector2::new(0.7, -1.9);
    let conj = conjugation_2d(&loc, -0.4, &xi).unwrap();
    let p = maxwell_symbol_2d(&loc, -0.4, &xi);
    assert!((p - conj.product()).norm() < 1e-12);
    // a flipped eigenvector sign without the matching change in n breaks the product
    let mut m = conj.m;
    for i in 0..3 {
        m[(i, 1)] = -m[(i, 1)];
    }
    let broken = (p - m * conj.d * conj.n).norm();
    assert!(broken > 0.1 * p.norm(), "{broken}");
}

#[test]
fn three_dimensional_negative_control() {
    let loc = Local3::flat();
    let xi = Vector3::new(0.2, 0.1, 1.0);
    let conj = conjugation_3d(&loc, 0.5, &xi, 2, BRANCH_CUTOFF).unwrap();
    let mut m = conj.m;
    for i in 0..6 {
        m[(i, 2)] = -m[(i, 2)];
    }
    let p = maxwell_symbol_3d(&loc, 0.5, &xi);
    assert!((p - m * conj.d * conj.n).norm() > 0.1);
}

#[test]
fn below_branch_cutoff_is_refused() {
    let r = conjugation_3d(&Local3::flat(), 0.0, &Vector3::new(1.0, 1.0, 0.1), 2, BRANCH_CUTOFF);
    assert!(matches!(r, Err(MaxlabError::BranchCutoff { .. })));
}

#[test]
fn curl_symbol_squares_to_projection() {
    let xi = Vector3::new(1.0, 2.0, -0.5);
    let c = curl_symbol(&xi);
    let want = xi * xi.transpose() - Matrix3::identity() * xi.norm_squared();
    assert!((c * c - want).norm() < 1e-13);
}

#[test]
fn quantized_multiplier_matches_fft() {
    let g = TorusGrid::cube(2, 16, 2.0 * std::f64::consts::PI).unwrap();
    let f = ScalarField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin() + (3.0 * x[0]).cos() * x[1].sin());
    let m = |k: [f64; 3]| 1.0 / (1.0 + k[0] * k[0] + k[1] * k[1]);
    let want = apply_multiplier(&f, m);
    let got = quantize(&|_, k| Complex64::new(m(*k), 0.0), &f, QUANTIZE_GUARD).unwrap();
    for (a, b) in got.iter().zip(want.values()) {
        assert!((a.re - b).abs() < 1e-12 && a.im.abs() < 1e-12);
    }
}

#[test]
fn quantized_spatial_symbol_is_multiplication() {
    let g = TorusGrid::cube(2, 12, 2.0 * std::f64::consts::PI).unwrap();
    let f = ScalarField::from_fn(&g, |x| (x[0] - x[1]).cos() + 0.3 * (2.0 * x[1]).sin());
    let kappa = ScalarField::from_fn(&g, |x| 2.0 + x[0].sin() * x[1].cos());
    let kv = kappa.values().to_vec();
    let got = quantize(&|p, _| Complex64::new(kv[p], 0.0), &f, QUANTIZE_GUARD).unwrap();
    for (p, a) in got.iter().enumerate() {
        assert!((a.re - kv[p] * f.values()[p]).abs() < 1e-12);
    }
}

#[test]
fn quantize_refuses_large_grids() {
    let g = TorusGrid::cube(2, 128, 1.0).unwrap();
    let f = ScalarField::zeros(&g);
    assert!(matches!(quantize(&|_, _| Complex64::new(1.0, 0.0), &f, QUANTIZE_GUARD), Err(MaxlabError::CostGuard { .. })));
}

#[test]
fn flat_medium_symbol_size() {
    let g = TorusGrid::cube(2, 8, 1.0).unwrap();
    let s = maxwell_symbol(&CoefficientSet::flat(&g));
    assert_eq!(s.eval(0, 1.0, &[1.0, 0.0, 0.0]).nrows(), 3);
}
