//! 2D symbol `p = i [xi0 eps, b; b^T, xi0 mu]` with `b = (-xi_2, xi_1)` and its
//! explicit diagonalization. `eps` is the symmetric 2x2 effective permittivity.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64;

use crate::coeffs::CoefficientSet;
use crate::error::{MaxlabError, Result};

pub type CMatrix3 = Matrix3<Complex64>;

#[derive(Debug, Clone, Copy)]
pub struct Local2 {
    pub eps: Matrix2<f64>,
    pub mu: f64,
}

impl Local2 {
    pub fn flat() -> Self {
        Self { eps: Matrix2::identity(), mu: 1.0 }
    }

    pub fn from_coeffs(c: &CoefficientSet, p: usize) -> Self {
        Self { eps: c.eps_prime.at2(p), mu: c.mu_prime.entry(p, 0, 0) }
    }

    /// `||xi||^2_{eps'} = <xi, eps xi> / (mu det eps)`
    pub fn frequency_norm(&self, xi: &Vector2<f64>) -> f64 {
        (xi.dot(&(self.eps * xi)) / (self.mu * self.eps.determinant())).sqrt()
    }
}

fn perp(xi: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-xi[1], xi[0])
}

pub fn maxwell_symbol_2d(loc: &Local2, xi0: f64, xi: &Vector2<f64>) -> CMatrix3 {
    let b = perp(xi);
    let e = loc.eps * xi0;
    let re = Matrix3::new(e[(0, 0)], e[(0, 1)], b[0], e[(1, 0)], e[(1, 1)], b[1], b[0], b[1], xi0 * loc.mu);
    re.map(|v| Complex64::new(0.0, v))
}

#[derive(Debug, Clone)]
pub struct Conjugation2 {
    pub m: CMatrix3,
    pub d: CMatrix3,
    pub n: CMatrix3,
    pub norm: f64,
}

impl Conjugation2 {
    pub fn product(&self) -> CMatrix3 {
        self.m * self.d * self.n
    }
}

/// `m`, `d = i diag(xi0, xi0 - ||xi||, xi0 + ||xi||)` and `n` with `p = m d n`.
pub fn conjugation_2d(loc: &Local2, xi0: f64, xi: &Vector2<f64>) -> Result<Conjugation2> {
    let nrm = loc.frequency_norm(xi);
    if !(nrm > 0.0) {
        return Err(MaxlabError::Degenerate("zero spatial frequency has no conjugation".into()));
    }
    let xs = xi / nrm;
    let bs = perp(&xs);
    let det = loc.eps.determinant();
    let mu = loc.mu;
    let einv = loc.eps.try_inverse().ok_or_else(|| MaxlabError::Ellipticity("singular permittivity".into()))?;
    let c1 = loc.eps * xs / det;
    let m = Matrix3::new(
        c1[0], bs[0] / mu, -bs[0] / mu, //
        c1[1], bs[1] / mu, -bs[1] / mu, //
        0.0, -1.0, -1.0,
    );
    let eb = einv * bs;
    let ntil = Matrix3::new(
        xs[0] / mu, xs[1] / mu, 0.0, //
        eb[0] / 2.0, eb[1] / 2.0, -0.5, //
        -eb[0] / 2.0, -eb[1] / 2.0, -0.5,
    );
    let mut w = Matrix3::zeros();
    w.fixed_view_mut::<2, 2>(0, 0).copy_from(&loc.eps);
    w[(2, 2)] = mu;
    let n = ntil * w;
    let d = Vector3::new(xi0, xi0 - nrm, xi0 + nrm);
    Ok(Conjugation2 {
        m: m.map(|v| Complex64::new(v, 0.0)),
        d: CMatrix3::from_diagonal(&d.map(|v| Complex64::new(0.0, v))),
        n: n.map(|v| Complex64::new(v, 0.0)),
        norm: nrm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_static_spectrum() {
        let xi = Vector2::new(0.6, 0.8);
        let p = maxwell_symbol_2d(&Local2::flat(), 0.0, &xi).map(|z| z.im);
        let mut ev: Vec<f64> = p.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + 1.0).abs() < 1e-12 && ev[1].abs() < 1e-12 && (ev[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_row_of_n_diagonal_case() {
        let loc = Local2 { eps: Matrix2::new(2.0, 0.0, 0.0, 0.5), mu: 1.5 };
        let xi = Vector2::new(1.0, 2.0);
        let c = conjugation_2d(&loc, 0.3, &xi).unwrap();
        let xs = xi / c.norm;
        assert!((c.n[(0, 0)].re - xs[0] * 2.0 / 1.5).abs() < 1e-14);
        assert!((c.n[(0, 1)].re - xs[1] * 0.5 / 1.5).abs() < 1e-14);
        assert_eq!(c.n[(0, 2)].re, 0.0);
    }
}
