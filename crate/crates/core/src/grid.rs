//! Periodic torus grids and the FFT plumbing behind every spectral operation.
//!
//! The reflected domain is a torus whose normal axis has an even point count.
//! Index 0 on that axis is the boundary plane `x_d = 0`, and the reflection
//! `x_d -> -x_d` acts on indices as `j -> (n - j) mod n`. Index `n/2` is the
//! periodization seam, the second fixed point of the reflection.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{MaxlabError, Result};

struct GridInner {
    shape: Vec<usize>,
    lengths: Vec<f64>,
    normal_axis: usize,
    strides: Vec<usize>,
    wavenumbers: Vec<Vec<f64>>,
    deriv_wavenumbers: Vec<Vec<f64>>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

/// Uniform periodic grid on a 2D or 3D torus. Cheap to clone.
#[derive(Clone)]
pub struct TorusGrid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("shape", &self.inner.shape)
            .field("lengths", &self.inner.lengths)
            .field("normal_axis", &self.inner.normal_axis)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.shape == other.inner.shape
                && self.inner.lengths == other.inner.lengths
                && self.inner.normal_axis == other.inner.normal_axis)
    }
}

impl TorusGrid {
    pub fn new(shape: &[usize], lengths: &[f64], normal_axis: usize) -> Result<Self> {
        let dim = shape.len();
        if !(2..=3).contains(&dim) || lengths.len() != dim {
            return Err(MaxlabError::InvalidInput(format!(
                "grid must be 2D or 3D with one length per axis, got shape {shape:?} lengths {lengths:?}"
            )));
        }
        if normal_axis >= dim {
            return Err(MaxlabError::InvalidInput(format!("normal axis {normal_axis} out of range")));
        }
        if shape.iter().any(|&n| n < 4) {
            return Err(MaxlabError::InvalidInput(format!("need at least 4 points per axis, got {shape:?}")));
        }
        if shape[normal_axis] % 2 != 0 {
            return Err(MaxlabError::InvalidInput(
                "normal axis needs an even point count so the boundary plane sits on the grid".into(),
            ));
        }
        if lengths.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(MaxlabError::InvalidInput(format!("bad torus lengths {lengths:?}")));
        }

        let mut strides = vec![1usize; dim];
        for a in (0..dim - 1).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        let mut planner = FftPlanner::new();
        let mut wavenumbers = Vec::with_capacity(dim);
        let mut deriv_wavenumbers = Vec::with_capacity(dim);
        let mut forward = Vec::with_capacity(dim);
        let mut inverse = Vec::with_capacity(dim);
        for a in 0..dim {
            let n = shape[a];
            let scale = 2.0 * PI / lengths[a];
            let k: Vec<f64> = (0..n)
                .map(|i| {
                    let m = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
                    m * scale
                })
                .collect();
            // the Nyquist mode has no well-defined sign, so first derivatives drop it
            let mut dk = k.clone();
            if n % 2 == 0 {
                dk[n / 2] = 0.0;
            }
            wavenumbers.push(k);
            deriv_wavenumbers.push(dk);
            forward.push(planner.plan_fft_forward(n));
            inverse.push(planner.plan_fft_inverse(n));
        }
        Ok(Self {
            inner: Arc::new(GridInner {
                shape: shape.to_vec(),
                lengths: lengths.to_vec(),
                normal_axis,
                strides,
                wavenumbers,
                deriv_wavenumbers,
                forward,
                inverse,
            }),
        })
    }

    /// `n` points and length `length` on every axis, normal axis last.
    pub fn cube(dim: usize, n: usize, length: f64) -> Result<Self> {
        Self::new(&vec![n; dim], &vec![length; dim], dim.saturating_sub(1))
    }

    pub fn dim(&self) -> usize {
        self.inner.shape.len()
    }
    pub fn shape(&self) -> &[usize] {
        &self.inner.shape
    }
    pub fn lengths(&self) -> &[f64] {
        &self.inner.lengths
    }
    pub fn normal_axis(&self) -> usize {
        self.inner.normal_axis
    }
    pub fn len(&self) -> usize {
        self.inner.shape.iter().product()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn stride(&self, axis: usize) -> usize {
        self.inner.strides[axis]
    }
    pub fn spacing(&self, axis: usize) -> f64 {
        self.inner.lengths[axis] / self.inner.shape[axis] as f64
    }
    pub fn min_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(f64::INFINITY, f64::min)
    }
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }
    pub fn volume(&self) -> f64 {
        self.inner.lengths.iter().product()
    }

    /// Coordinate of point `i` along `axis`, in `[0, L)`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        i as f64 * self.spacing(axis)
    }

    /// Coordinate wrapped to `[-L/2, L/2)`, the natural chart for the reflection.
    pub fn centered_coord(&self, axis: usize, i: usize) -> f64 {
        let n = self.inner.shape[axis];
        let m = if i < n / 2 || (n % 2 == 1 && i == n / 2) { i as f64 } else { i as f64 - n as f64 };
        m * self.spacing(axis)
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rem = flat;
        for a in 0..self.dim() {
            out[a] = rem / self.inner.strides[a];
            rem %= self.inner.strides[a];
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.inner.strides).map(|(i, s)| i * s).sum()
    }

    /// Physical point of a flat index, centered chart on every axis.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim() {
            x[a] = self.centered_coord(a, idx[a]);
        }
        x
    }

    /// Image of a flat index under the reflection of the normal axis.
    pub fn reflect_flat(&self, flat: usize) -> usize {
        let a = self.inner.normal_axis;
        let n = self.inner.shape[a];
        let s = self.inner.strides[a];
        let j = (flat / s) % n;
        let jr = (n - j) % n;
        flat - j * s + jr * s
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.inner.wavenumbers[axis]
    }
    pub fn deriv_wavenumbers(&self, axis: usize) -> &[f64] {
        &self.inner.deriv_wavenumbers[axis]
    }

    /// Wave vector of the mode stored at `flat` (unused axes are zero).
    pub fn xi(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut k = [0.0; 3];
        for a in 0..self.dim() {
            k[a] = self.inner.wavenumbers[a][idx[a]];
        }
        k
    }

    pub fn deriv_xi(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut k = [0.0; 3];
        for a in 0..self.dim() {
            k[a] = self.inner.deriv_wavenumbers[a][idx[a]];
        }
        k
    }

    pub fn xi_norm(&self, flat: usize) -> f64 {
        let k = self.xi(flat);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
    }

    /// Largest `|xi|` on the lattice (a corner mode).
    pub fn max_xi_norm(&self) -> f64 {
        (0..self.dim())
            .map(|a| {
                let k = (self.inner.shape[a] / 2) as f64 * 2.0 * PI / self.inner.lengths[a];
                k * k
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Largest first-derivative symbol magnitude, which controls explicit stability.
    pub fn max_deriv_xi_norm(&self) -> f64 {
        (0..self.dim())
            .map(|a| {
                let m = self.inner.deriv_wavenumbers[a].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Fourier-series coefficients: `f(x) = sum_k fhat_k exp(i xi_k . x)`.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.len(), "field length does not match grid");
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, false);
        let scale = 1.0 / self.len() as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        buf
    }

    pub fn forward_complex(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.transform(&mut buf, false);
        let scale = 1.0 / self.len() as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        buf
    }

    /// Inverse of [`forward`](Self::forward); returns the real part.
    pub fn inverse_real(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut coeffs, true);
        coeffs.into_iter().map(|c| c.re).collect()
    }

    pub fn inverse_complex(&self, mut coeffs: Vec<Complex64>) -> Vec<Complex64> {
        self.transform(&mut coeffs, true);
        coeffs
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let dim = self.dim();
        for axis in 0..dim {
            let plan = if inverse { &self.inner.inverse[axis] } else { &self.inner.forward[axis] };
            let n = self.inner.shape[axis];
            let inner = self.inner.strides[axis];
            if inner == 1 {
                plan.process(data);
                continue;
            }
            // transpose each (n x inner) block so the lines become contiguous
            let block = n * inner;
            let mut tmp = vec![Complex64::new(0.0, 0.0); block];
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            for chunk in data.chunks_mut(block) {
                for j in 0..n {
                    for i in 0..inner {
                        tmp[i * n + j] = chunk[j * inner + i];
                    }
                }
                plan.process_with_scratch(&mut tmp, &mut scratch);
                for j in 0..n {
                    for i in 0..inner {
                        chunk[j * inner + i] = tmp[i * n + j];
                    }
                }
            }
        }
    }

    pub fn same_as(&self, other: &TorusGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(MaxlabError::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverse_round_trip() {
        let g = TorusGrid::new(&[6, 8, 4], &[1.0, 2.0, 3.0], 1).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let back = g.inverse_real(g.forward(&v));
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_lands_on_its_coefficient() {
        let g = TorusGrid::cube(2, 8, 2.0 * PI).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|f| (2.0 * g.point(f)[1]).cos()).collect();
        let c = g.forward(&v);
        let hit = g.flat_index(&[0, 2]);
        assert!((c[hit].re - 0.5).abs() < 1e-14);
        let total: f64 = c.iter().map(|z| z.norm()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reflection_fixes_boundary_and_seam() {
        let g = TorusGrid::cube(2, 8, 1.0).unwrap();
        for i in 0..8 {
            for j in [0usize, 4] {
                let f = g.flat_index(&[i, j]);
                assert_eq!(g.reflect_flat(f), f);
            }
            let f = g.flat_index(&[i, 3]);
            assert_eq!(g.reflect_flat(f), g.flat_index(&[i, 5]));
        }
    }

    #[test]
    fn odd_normal_count_rejected() {
        assert!(TorusGrid::new(&[8, 7], &[1.0, 1.0], 1).is_err());
        assert!(TorusGrid::new(&[7, 8], &[1.0, 1.0], 1).is_ok());
    }
}
