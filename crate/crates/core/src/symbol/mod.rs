//! Symbol algebra: curl symbol, principal symbols, conjugations, phase-space
//! partitions and a dense quantizer for small grids.

pub mod curl;
pub mod maxwell2d;
pub mod maxwell3d;

use std::sync::Arc;

use nalgebra::{DMatrix, Vector2, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeffs::CoefficientSet;
use crate::error::{MaxlabError, Result};
use crate::field::ScalarField;
use crate::lp::psi;

pub use curl::{adjugate, adjugate_identity_residual, c_squared_residual, curl_symbol};
pub use maxwell2d::{conjugation_2d, maxwell_symbol_2d, Conjugation2, Local2};
pub use maxwell3d::{
    conjugation_3d, maxwell_symbol_3d, orthonormal_eigenbasis, raw_eigenbasis, Conjugation3, Local3, BRANCH_CUTOFF,
};

type SymbolFn = dyn Fn(usize, f64, &[f64; 3]) -> DMatrix<Complex64> + Send + Sync;

/// Matrix-valued symbol `p(x, xi0, xi)`, `x` a grid point index.
#[derive(Clone)]
pub struct SymbolMatrix {
    pub size: usize,
    pub degree: i32,
    eval: Arc<SymbolFn>,
}

impl std::fmt::Debug for SymbolMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SymbolMatrix({}x{}, degree {})", self.size, self.size, self.degree)
    }
}

impl SymbolMatrix {
    pub fn new(size: usize, degree: i32, eval: impl Fn(usize, f64, &[f64; 3]) -> DMatrix<Complex64> + Send + Sync + 'static) -> Self {
        Self { size, degree, eval: Arc::new(eval) }
    }

    pub fn eval(&self, point: usize, xi0: f64, xi: &[f64; 3]) -> DMatrix<Complex64> {
        (self.eval)(point, xi0, xi)
    }

    /// `|| p(t xi) - t^degree p(xi) ||_F`
    pub fn homogeneity_defect(&self, point: usize, xi0: f64, xi: &[f64; 3], t: f64) -> f64 {
        let a = self.eval(point, t * xi0, &[t * xi[0], t * xi[1], t * xi[2]]);
        let b = self.eval(point, xi0, xi) * Complex64::new(t.powi(self.degree), 0.0);
        (a - b).norm()
    }
}

/// Principal symbol of the reflected system with the given (possibly truncated) coefficients.
pub fn maxwell_symbol(coeffs: &CoefficientSet) -> SymbolMatrix {
    let c = coeffs.clone();
    if coeffs.dim() == 3 {
        SymbolMatrix::new(6, 1, move |p, xi0, xi| {
            let m = maxwell_symbol_3d(&Local3::from_coeffs(&c, p), xi0, &Vector3::new(xi[0], xi[1], xi[2]));
            DMatrix::from_iterator(6, 6, m.iter().copied())
        })
    } else {
        SymbolMatrix::new(3, 1, move |p, xi0, xi| {
            let m = maxwell_symbol_2d(&Local2::from_coeffs(&c, p), xi0, &Vector2::new(xi[0], xi[1]));
            DMatrix::from_iterator(3, 3, m.iter().copied())
        })
    }
}

/// Smooth switch: 0 for `t <= lo`, 1 for `t >= hi`.
fn switch(t: f64, lo: f64, hi: f64) -> f64 {
    psi(1.0 + ((hi - t) / (hi - lo)).clamp(0.0, 1.0))
}

/// Conic partition `pi_i = chi_lambda(|xi|) theta_i(w)` with `w = A^T xi / |A^T xi|`.
/// `theta_i` vanishes where `|w_i| < cutoff` and the `theta_i` sum to one, because
/// some `|w_i| >= 1/sqrt(3)` for every unit vector.
#[derive(Debug, Clone, Copy)]
pub struct PhasePartition {
    pub lambda: f64,
    pub cutoff: f64,
}

impl PhasePartition {
    pub fn new(lambda: f64) -> Self {
        Self { lambda, cutoff: BRANCH_CUTOFF }
    }

    pub fn annulus(&self, r: f64) -> f64 {
        psi(r / self.lambda) - psi(2.0 * r / self.lambda)
    }

    pub fn weights(&self, a: &nalgebra::Matrix3<f64>, xi: &Vector3<f64>) -> [f64; 3] {
        let w = a.transpose() * xi;
        let nw = w.norm();
        if nw == 0.0 {
            return [0.0; 3];
        }
        let full = 1.0 / 3f64.sqrt();
        let th: Vec<f64> = (0..3).map(|i| switch((w[i] / nw).abs(), self.cutoff, full)).collect();
        let s: f64 = th.iter().sum();
        let chi = self.annulus(xi.norm());
        [chi * th[0] / s, chi * th[1] / s, chi * th[2] / s]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchResidual {
    pub branch: usize,
    pub samples: usize,
    pub max_residual: f64,
    pub max_orthonormality_defect: f64,
}

/// Sample `||p - m d n||_F` over the annulus at scale `lambda` for every branch.
/// `coeffs` should already be truncated (scheme B) at `lambda`.
pub fn factorization_residual(coeffs: &CoefficientSet, lambda: f64, samples: usize, seed: u64) -> Result<Vec<BranchResidual>> {
    if samples == 0 {
        return Err(MaxlabError::InvalidInput("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let npts = coeffs.grid.len();
    let mut out = Vec::new();
    if coeffs.dim() == 3 {
        let part = PhasePartition::new(lambda);
        for branch in 0..3 {
            let mut worst = 0.0f64;
            let mut ortho = 0.0f64;
            let mut taken = 0;
            let mut tries = 0;
            while taken < samples {
                tries += 1;
                if tries > 1000 * samples {
                    return Err(MaxlabError::Degenerate(format!("branch {branch} never admissible")));
                }
                let p = rng.random_range(0..npts);
                let loc = Local3::from_coeffs(coeffs, p);
                let xi = random_annulus_point3(&mut rng, lambda);
                if part.weights(&loc.a, &xi)[branch] <= 0.0 {
                    continue;
                }
                let xt = loc.reduced_frequency(&xi);
                if (xt[branch] / xt.norm()).abs() < BRANCH_CUTOFF {
                    continue;
                }
                let xi0 = rng.random_range(-2.0 * lambda..2.0 * lambda);
                let conj = conjugation_3d(&loc, xi0, &xi, branch, BRANCH_CUTOFF)?;
                let r = (maxwell_symbol_3d(&loc, xi0, &xi) - conj.product()).norm();
                worst = worst.max(r);
                ortho = ortho.max(conj.orthonormality_defect());
                taken += 1;
            }
            out.push(BranchResidual { branch, samples, max_residual: worst, max_orthonormality_defect: ortho });
        }
    } else {
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let p = rng.random_range(0..npts);
            let loc = Local2::from_coeffs(coeffs, p);
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            let r = rng.random_range(lambda / 2.0..2.0 * lambda);
            let xi = Vector2::new(r * t.cos(), r * t.sin());
            let xi0 = rng.random_range(-2.0 * lambda..2.0 * lambda);
            let conj = conjugation_2d(&loc, xi0, &xi)?;
            worst = worst.max((maxwell_symbol_2d(&loc, xi0, &xi) - conj.product()).norm());
        }
        out.push(BranchResidual { branch: 0, samples, max_residual: worst, max_orthonormality_defect: 0.0 });
    }
    Ok(out)
}

fn random_annulus_point3(rng: &mut impl Rng, lambda: f64) -> Vector3<f64> {
    loop {
        let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n * rng.random_range(lambda / 2.0..2.0 * lambda);
        }
    }
}

/// Default point budget for [`quantize`].
pub const QUANTIZE_GUARD: usize = 4096;

/// Dense Kohn-Nirenberg quantization `a(x, D) f (x) = sum_xi exp(i x.xi) a(x, xi) fhat(xi)`.
/// Cost is quadratic in the number of grid points, so large grids are refused.
pub fn quantize(a: &dyn Fn(usize, &[f64; 3]) -> Complex64, f: &ScalarField, guard: usize) -> Result<Vec<Complex64>> {
    let g = f.grid();
    let n = g.len();
    if n > guard {
        return Err(MaxlabError::CostGuard { points: n, guard });
    }
    let spec = f.spectrum();
    let xis: Vec<[f64; 3]> = (0..n).map(|k| g.xi(k)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (p, o) in out.iter_mut().enumerate() {
        // grid coordinates in [0, L) so the phases match the FFT convention
        let idx = g.multi_index(p);
        let x: Vec<f64> = (0..g.dim()).map(|ax| g.coord(ax, idx[ax])).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, xi) in xis.iter().enumerate() {
            if spec[k] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let phase: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
            acc += Complex64::from_polar(1.0, phase) * a(p, xi) * spec[k];
        }
        *o = acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    #[test]
    fn partition_sums_to_annulus() {
        let part = PhasePartition::new(8.0);
        let a = nalgebra::Matrix3::identity();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let xi = random_annulus_point3(&mut rng, 8.0);
            let w = part.weights(&a, &xi);
            let s: f64 = w.iter().sum();
            assert!((s - part.annulus(xi.norm())).abs() < 1e-14);
            for i in 0..3 {
                if w[i] > 0.0 {
                    assert!((xi[i] / xi.norm()).abs() >= BRANCH_CUTOFF);
                }
            }
        }
    }

    #[test]
    fn quantize_identity() {
        let g = TorusGrid::cube(2, 8, 2.0 * std::f64::consts::PI).unwrap();
        let f = ScalarField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin() + 0.2);
        let out = quantize(&|_, _| Complex64::new(1.0, 0.0), &f, QUANTIZE_GUARD).unwrap();
        for (a, b) in out.iter().zip(f.values()) {
            assert!((a.re - b).abs() < 1e-13 && a.im.abs() < 1e-13);
        }
    }

    #[test]
    fn symbol_is_degree_one() {
        let g = TorusGrid::cube(3, 4, 1.0).unwrap();
        let s = maxwell_symbol(&CoefficientSet::flat(&g));
        assert!(s.homogeneity_defect(3, 0.7, &[1.0, -2.0, 0.5], 3.5) < 1e-13);
    }
}
