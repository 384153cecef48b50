//! Material and metric coefficients on the reflected torus.
//!
//! The evolution uses the effective tensors
//! `eps' = sqrt(g) g^{-1} eps` and `mu' = sqrt(g) g^{-1} mu` (3D) or `mu' = sqrt(g) mu` (2D),
//! where `g^{-1}` is the cometric and `A` its lower Cholesky factor.

use nalgebra::{Matrix2, Matrix3};

use crate::error::{MaxlabError, Result};
use crate::field::ScalarField;
use crate::grid::TorusGrid;

/// Pointwise symmetric `n x n` tensor, entries stored upper-triangular row-major.
#[derive(Debug, Clone)]
pub struct SymTensorField {
    pub n: usize,
    pub comps: Vec<ScalarField>,
}

fn sym_slot(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows before i hold n, n-1, ... entries
    i * n - i * (i + 1) / 2 + j
}

impl SymTensorField {
    pub fn zeros(grid: &TorusGrid, n: usize) -> Self {
        Self { n, comps: (0..n * (n + 1) / 2).map(|_| ScalarField::zeros(grid)).collect() }
    }

    /// `s(x) * I`
    pub fn scalar(s: &ScalarField, n: usize) -> Self {
        let mut t = Self::zeros(s.grid(), n);
        for i in 0..n {
            t.comps[sym_slot(n, i, i)] = s.clone();
        }
        t
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[sym_slot(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, f: ScalarField) {
        let k = sym_slot(self.n, i, j);
        self.comps[k] = f;
    }

    pub fn entry(&self, p: usize, i: usize, j: usize) -> f64 {
        self.comps[sym_slot(self.n, i, j)].values()[p]
    }

    pub fn grid(&self) -> &TorusGrid {
        self.comps[0].grid()
    }

    pub fn at3(&self, p: usize) -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        for i in 0..self.n.min(3) {
            for j in 0..self.n.min(3) {
                m[(i, j)] = self.entry(p, i, j);
            }
        }
        m
    }

    pub fn at2(&self, p: usize) -> Matrix2<f64> {
        Matrix2::new(self.entry(p, 0, 0), self.entry(p, 0, 1), self.entry(p, 1, 0), self.entry(p, 1, 1))
    }

    /// Pointwise inverse; fails where the tensor is not positive definite.
    pub fn inverse(&self) -> Result<Self> {
        let g = self.grid().clone();
        let mut out = Self::zeros(&g, self.n);
        let len = g.len();
        let mut bufs: Vec<Vec<f64>> = vec![vec![0.0; len]; self.comps.len()];
        for p in 0..len {
            match self.n {
                1 => {
                    let v = self.entry(p, 0, 0);
                    if !(v > 0.0) {
                        return Err(MaxlabError::Ellipticity(format!("scalar coefficient {v} at point {p}")));
                    }
                    bufs[0][p] = 1.0 / v;
                }
                2 => {
                    let m = self.at2(p);
                    let inv = m.cholesky().map(|c| c.inverse()).ok_or_else(|| {
                        MaxlabError::Ellipticity(format!("2x2 tensor not positive definite at point {p}"))
                    })?;
                    for i in 0..2 {
                        for j in i..2 {
                            bufs[sym_slot(2, i, j)][p] = inv[(i, j)];
                        }
                    }
                }
                _ => {
                    let m = self.at3(p);
                    let inv = m.cholesky().map(|c| c.inverse()).ok_or_else(|| {
                        MaxlabError::Ellipticity(format!("3x3 tensor not positive definite at point {p}"))
                    })?;
                    for i in 0..3 {
                        for j in i..3 {
                            bufs[sym_slot(3, i, j)][p] = inv[(i, j)];
                        }
                    }
                }
            }
        }
        for (k, b) in bufs.into_iter().enumerate() {
            out.comps[k] = ScalarField::new(&g, b)?;
        }
        Ok(out)
    }

    /// Pointwise `T v`.
    pub fn apply(&self, v: &[ScalarField]) -> Vec<ScalarField> {
        let n = self.n;
        let g = self.grid();
        let len = g.len();
        let mut out = vec![vec![0.0; len]; n];
        for i in 0..n {
            for j in 0..n {
                let t = self.get(i, j).values();
                let x = v[j].values();
                let o = &mut out[i];
                for p in 0..len {
                    o[p] += t[p] * x[p];
                }
            }
        }
        out.into_iter().map(|o| ScalarField::new(g, o).unwrap()).collect()
    }

    /// Smallest and largest pointwise eigenvalue.
    pub fn eigen_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in 0..self.grid().len() {
            let (a, b) = match self.n {
                1 => {
                    let v = self.entry(p, 0, 0);
                    (v, v)
                }
                2 => {
                    let e = self.at2(p).symmetric_eigenvalues();
                    (e.min(), e.max())
                }
                _ => {
                    let e = self.at3(p).symmetric_eigenvalues();
                    (e.min(), e.max())
                }
            };
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo, hi)
    }

    pub fn map_comps(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self { n: self.n, comps: self.comps.iter().map(f).collect() }
    }
}

/// Pointwise lower-triangular `n x n` matrix, entries row-major `(i, j <= i)`.
#[derive(Debug, Clone)]
pub struct LowerTriField {
    pub n: usize,
    pub comps: Vec<ScalarField>,
}

fn tri_slot(i: usize, j: usize) -> usize {
    i * (i + 1) / 2 + j
}

impl LowerTriField {
    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[tri_slot(i, j)]
    }

    pub fn at3(&self, p: usize) -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        for i in 0..self.n {
            for j in 0..=i {
                m[(i, j)] = self.comps[tri_slot(i, j)].values()[p];
            }
        }
        m
    }

    /// Pointwise Cholesky factor of a symmetric tensor field.
    pub fn cholesky(t: &SymTensorField) -> Result<Self> {
        let g = t.grid().clone();
        let n = t.n;
        let len = g.len();
        let mut bufs = vec![vec![0.0; len]; n * (n + 1) / 2];
        for p in 0..len {
            let m = t.at3(p);
            let sub = m.view((0, 0), (n, n)).clone_owned();
            let l = sub
                .cholesky()
                .ok_or_else(|| MaxlabError::Ellipticity(format!("cometric not positive definite at point {p}")))?
                .l();
            for i in 0..n {
                for j in 0..=i {
                    bufs[tri_slot(i, j)][p] = l[(i, j)];
                }
            }
        }
        Ok(Self { n, comps: bufs.into_iter().map(|b| ScalarField::new(&g, b).unwrap()).collect() })
    }

    /// Pointwise determinant (product of the diagonal).
    pub fn det(&self) -> ScalarField {
        let mut d = self.get(0, 0).clone();
        for i in 1..self.n {
            d = d.zip_with(self.get(i, i), |a, b| a * b);
        }
        d
    }

    /// Pointwise `A A^T`.
    pub fn gram(&self) -> SymTensorField {
        let g = self.comps[0].grid().clone();
        let n = self.n;
        let mut out = SymTensorField::zeros(&g, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = vec![0.0; g.len()];
                for k in 0..=i.min(j) {
                    let a = self.get(i, k).values();
                    let b = self.get(j, k).values();
                    for p in 0..acc.len() {
                        acc[p] += a[p] * b[p];
                    }
                }
                out.set(i, j, ScalarField::new(&g, acc).unwrap());
            }
        }
        out
    }

    pub fn map_comps(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self { n: self.n, comps: self.comps.iter().map(f).collect() }
    }
}

/// Everything the solver and the symbol layer need about the medium.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub grid: TorusGrid,
    pub epsilon: ScalarField,
    pub mu: ScalarField,
    /// `g^{ij}`, the inverse metric.
    pub cometric: SymTensorField,
    /// Lower Cholesky factor `A` with `A A^T = g^{-1}`.
    pub jacobian: LowerTriField,
    pub sqrt_g: ScalarField,
    /// Scalar weight in `eps' = h A A^T eps`; equals `sqrt(g) = 1/det A` before truncation.
    pub h: ScalarField,
    pub eps_prime: SymTensorField,
    pub mu_prime: SymTensorField,
}

impl CoefficientSet {
    /// Isotropic `eps`, `mu` and a cometric on the full torus.
    pub fn from_parts(epsilon: ScalarField, mu: ScalarField, cometric: SymTensorField) -> Result<Self> {
        let grid = epsilon.grid().clone();
        grid.same_as(mu.grid())?;
        grid.same_as(cometric.grid())?;
        if cometric.n != grid.dim() {
            return Err(MaxlabError::InvalidInput("cometric rank differs from grid dimension".into()));
        }
        for (f, name) in [(&epsilon, "epsilon"), (&mu, "mu")] {
            crate::error::ensure_finite(f.values(), name)?;
            if f.values().iter().any(|&v| !(v > 0.0)) {
                return Err(MaxlabError::Ellipticity(format!("{name} not positive")));
            }
        }
        let jacobian = LowerTriField::cholesky(&cometric)?;
        let h = jacobian.det().map(|d| 1.0 / d);
        Self::recompose(grid, epsilon, mu, cometric, jacobian, h.clone(), h)
    }

    pub fn flat(grid: &TorusGrid) -> Self {
        let one = ScalarField::constant(grid, 1.0);
        let mut cometric = SymTensorField::zeros(grid, grid.dim());
        for i in 0..grid.dim() {
            cometric.set(i, i, one.clone());
        }
        Self::from_parts(one.clone(), one, cometric).expect("flat coefficients are elliptic")
    }

    /// Rebuild `eps'`, `mu'` from `A`, `h`, `eps`, `mu`.
    pub fn recompose(
        grid: TorusGrid,
        epsilon: ScalarField,
        mu: ScalarField,
        cometric: SymTensorField,
        jacobian: LowerTriField,
        sqrt_g: ScalarField,
        h: ScalarField,
    ) -> Result<Self> {
        let gram = jacobian.gram();
        let weighted = |w: &ScalarField| gram.map_comps(|c| c.zip_with(&h, |a, b| a * b).zip_with(w, |a, b| a * b));
        let eps_prime = weighted(&epsilon);
        let mu_prime = if grid.dim() == 3 {
            weighted(&mu)
        } else {
            SymTensorField::scalar(&h.zip_with(&mu, |a, b| a * b), 1)
        };
        Ok(Self { grid, epsilon, mu, cometric, jacobian, sqrt_g, h, eps_prime, mu_prime })
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Smallest and largest eigenvalue over `eps'` and `mu'`.
    pub fn ellipticity(&self) -> (f64, f64) {
        let (a, b) = self.eps_prime.eigen_bounds();
        let (c, d) = self.mu_prime.eigen_bounds();
        (a.min(c), b.max(d))
    }

    /// Upper bound on the wave speed: `sqrt(max 1/eps' * max 1/mu')` over the grid.
    pub fn max_wave_speed(&self) -> Result<f64> {
        let (ea, _) = self.eps_prime.eigen_bounds();
        let (ma, _) = self.mu_prime.eigen_bounds();
        if !(ea > 0.0 && ma > 0.0) {
            return Err(MaxlabError::Ellipticity(format!("lower bounds eps' {ea}, mu' {ma}")));
        }
        Ok((1.0 / (ea * ma)).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_is_identity() {
        let g = TorusGrid::cube(3, 4, 1.0).unwrap();
        let c = CoefficientSet::flat(&g);
        assert_eq!(c.ellipticity(), (1.0, 1.0));
        assert!((c.max_wave_speed().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sqrt_g_is_inverse_det() {
        let g = TorusGrid::cube(3, 4, 1.0).unwrap();
        let mut cm = SymTensorField::zeros(&g, 3);
        cm.set(0, 0, ScalarField::constant(&g, 2.0));
        cm.set(0, 1, ScalarField::constant(&g, 0.5));
        cm.set(1, 1, ScalarField::constant(&g, 1.5));
        cm.set(2, 2, ScalarField::constant(&g, 1.0));
        let one = ScalarField::constant(&g, 1.0);
        let c = CoefficientSet::from_parts(one.clone(), one, cm).unwrap();
        let det = 2.0 * 1.5 - 0.25;
        assert!((c.sqrt_g.values()[0] - 1.0 / f64::sqrt(det)).abs() < 1e-14);
        let eps = c.eps_prime.at3(0);
        assert!((eps[(0, 1)] - 0.5 / det.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn inverse_then_apply() {
        let g = TorusGrid::cube(2, 4, 1.0).unwrap();
        let mut t = SymTensorField::zeros(&g, 2);
        t.set(0, 0, ScalarField::constant(&g, 2.0));
        t.set(0, 1, ScalarField::constant(&g, 0.3));
        t.set(1, 1, ScalarField::constant(&g, 1.0));
        let v = vec![ScalarField::constant(&g, 1.0), ScalarField::constant(&g, -2.0)];
        let back = t.inverse().unwrap().apply(&t.apply(&v));
        assert!((back[0].values()[3] - 1.0).abs() < 1e-14);
        assert!((back[1].values()[3] + 2.0).abs() < 1e-14);
    }
}
