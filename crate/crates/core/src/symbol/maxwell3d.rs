//! Principal symbol of the 3D reflected system and its conjugation to diagonal form.
//!
//! With `g^{-1} = A A^T`, `h = 1/det A` and `xi~ = A^T xi' / sqrt(eps mu)`,
//!
//! `p = i h (A+A)(sqrt eps + sqrt mu) [xi0, -C(xi~); C(xi~), xi0] (sqrt eps + sqrt mu)(A^T+A^T)`,
//!
//! and the middle matrix is diagonalized by an orthonormal basis built from
//! the eigenvectors `(v, +-C(w) v)`, `v` orthogonal to `w = xi~/|xi~|`.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};
use num_complex::Complex64;

use super::curl::curl_symbol;
use crate::coeffs::CoefficientSet;
use crate::error::{MaxlabError, Result};

pub type CMatrix6 = Matrix6<Complex64>;

/// Smallest admissible `|w_i|` for branch `i`.
pub const BRANCH_CUTOFF: f64 = 0.45;

/// Coefficients at one point.
#[derive(Debug, Clone, Copy)]
pub struct Local3 {
    pub eps: f64,
    pub mu: f64,
    pub a: Matrix3<f64>,
    pub h: f64,
}

impl Local3 {
    pub fn flat() -> Self {
        Self { eps: 1.0, mu: 1.0, a: Matrix3::identity(), h: 1.0 }
    }

    pub fn from_coeffs(c: &CoefficientSet, p: usize) -> Self {
        Self { eps: c.epsilon.values()[p], mu: c.mu.values()[p], a: c.jacobian.at3(p), h: c.h.values()[p] }
    }

    /// `xi~ = A^T xi / sqrt(eps mu)`
    pub fn reduced_frequency(&self, xi: &Vector3<f64>) -> Vector3<f64> {
        self.a.transpose() * xi / (self.eps * self.mu).sqrt()
    }
}

fn to_c(m: &Matrix6<f64>) -> CMatrix6 {
    m.map(|v| Complex64::new(v, 0.0))
}

fn block(a: &Matrix3<f64>, b: &Matrix3<f64>, c: &Matrix3<f64>, d: &Matrix3<f64>) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(a);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(b);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(c);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(d);
    m
}

/// `p(x, xi) = i [xi0 h A A^T eps, -C(xi'); C(xi'), xi0 h A A^T mu]`
pub fn maxwell_symbol_3d(loc: &Local3, xi0: f64, xi: &Vector3<f64>) -> CMatrix6 {
    let g = loc.a * loc.a.transpose() * loc.h;
    let c = curl_symbol(xi);
    let re = block(&(g * (xi0 * loc.eps)), &(-c), &c, &(g * (xi0 * loc.mu)));
    re.map(|v| Complex64::new(0.0, v))
}

/// Unnormalized eigenvector columns for branch `i` (0-based):
/// `[(w,0), (0,w), (v, Cv), (v, -Cv), (v', Cv'), (v', -Cv')]`
/// with `v = e_{i+1} x w`, `v' = e_{i+2} x w` (indices mod 3). Branch 2 is the
/// layout with `v = e_1 x w`, `v' = e_2 x w`.
pub fn raw_eigenbasis(omega: &Vector3<f64>, branch: usize) -> Matrix6<f64> {
    let ea = Vector3::ith((branch + 1) % 3, 1.0);
    let ec = Vector3::ith((branch + 2) % 3, 1.0);
    let c = curl_symbol(omega);
    let v = ea.cross(omega);
    let vp = ec.cross(omega);
    let (cv, cvp) = (c * v, c * vp);
    let col = |top: &Vector3<f64>, bot: &Vector3<f64>| Vector6::new(top[0], top[1], top[2], bot[0], bot[1], bot[2]);
    let z = Vector3::zeros();
    Matrix6::from_columns(&[
        col(omega, &z),
        col(&z, omega),
        col(&v, &cv),
        col(&v, &(-cv)),
        col(&vp, &cvp),
        col(&vp, &(-cvp)),
    ])
}

/// Gram-Schmidt on the raw basis: columns 3, 4 normalized, columns 5, 6
/// orthogonalized against 3, 4 respectively. The other pairs are already orthogonal.
pub fn orthonormal_eigenbasis(omega: &Vector3<f64>, branch: usize) -> Matrix6<f64> {
    let raw = raw_eigenbasis(omega, branch);
    let u1 = raw.column(0).into_owned();
    let u2 = raw.column(1).into_owned();
    let w1 = raw.column(2).normalize();
    let w2 = raw.column(3).normalize();
    let c5 = raw.column(4).into_owned();
    let c6 = raw.column(5).into_owned();
    let w3 = (&c5 - &w1 * w1.dot(&c5)).normalize();
    let w4 = (&c6 - &w2 * w2.dot(&c6)).normalize();
    Matrix6::from_columns(&[u1, u2, w1, w2, w3, w4])
}

/// Eigenvalue order matching the columns of [`raw_eigenbasis`].
pub fn eigenvalues(xi0: f64, r: f64) -> [f64; 6] {
    [xi0, xi0, xi0 + r, xi0 - r, xi0 + r, xi0 - r]
}

#[derive(Debug, Clone)]
pub struct Conjugation3 {
    pub m: CMatrix6,
    pub d: CMatrix6,
    pub n: CMatrix6,
    pub m_tilde: Matrix6<f64>,
    pub xi_tilde: Vector3<f64>,
    pub eigenvalues: [f64; 6],
}

impl Conjugation3 {
    pub fn product(&self) -> CMatrix6 {
        self.m * self.d * self.n
    }

    /// `|| m~^T m~ - I ||_F`
    pub fn orthonormality_defect(&self) -> f64 {
        (self.m_tilde.transpose() * self.m_tilde - Matrix6::identity()).norm()
    }
}

/// Conjugation `p = m d n` on branch `branch`, which needs `|w_branch| >= cutoff`.
pub fn conjugation_3d(loc: &Local3, xi0: f64, xi: &Vector3<f64>, branch: usize, cutoff: f64) -> Result<Conjugation3> {
    if branch > 2 {
        return Err(MaxlabError::InvalidInput(format!("branch {branch} not in 0..3")));
    }
    let xt = loc.reduced_frequency(xi);
    let r = xt.norm();
    if !(r > 0.0) {
        return Err(MaxlabError::Degenerate("zero spatial frequency has no conjugation".into()));
    }
    let omega = xt / r;
    if omega[branch].abs() < cutoff {
        return Err(MaxlabError::BranchCutoff { branch, value: omega[branch].abs(), cutoff });
    }
    let mt = orthonormal_eigenbasis(&omega, branch);
    let s = Matrix6::from_diagonal(&Vector6::new(
        loc.eps.sqrt(),
        loc.eps.sqrt(),
        loc.eps.sqrt(),
        loc.mu.sqrt(),
        loc.mu.sqrt(),
        loc.mu.sqrt(),
    ));
    let z = Matrix3::zeros();
    let ab = block(&loc.a, &z, &z, &loc.a);
    let m = to_c(&(ab * s * mt * loc.h));
    let n = to_c(&(mt.transpose() * s * ab.transpose()));
    let ev = eigenvalues(xi0, r);
    let d = CMatrix6::from_diagonal(&Vector6::from_iterator(ev.iter().map(|&l| Complex64::new(0.0, l))));
    Ok(Conjugation3 { m, d, n, m_tilde: mt, xi_tilde: xt, eigenvalues: ev })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_symbol_spectrum() {
        let p = maxwell_symbol_3d(&Local3::flat(), 1.0, &Vector3::new(0.0, 0.0, 1.0));
        let re = p.map(|z| z.im);
        let mut ev: Vec<f64> = re.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = [0.0, 0.0, 1.0, 1.0, 2.0, 2.0];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn raw_basis_at_pole() {
        let m = raw_eigenbasis(&Vector3::new(0.0, 0.0, 1.0), 2);
        assert!((m.determinant() + 4.0).abs() < 1e-14);
        let mt = orthonormal_eigenbasis(&Vector3::new(0.0, 0.0, 1.0), 2);
        assert!((mt.transpose() * mt - Matrix6::identity()).norm() < 1e-14);
    }

    #[test]
    fn below_cutoff_refused() {
        let e = conjugation_3d(&Local3::flat(), 0.0, &Vector3::new(1.0, 0.0, 0.1), 2, BRANCH_CUTOFF);
        assert!(matches!(e, Err(MaxlabError::BranchCutoff { .. })));
    }
}
