use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{MaxlabError, Result};
use crate::grid::TorusGrid;

/// Behaviour of a component under the reflection of the normal axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
    /// Parity after one derivative along the normal axis.
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
    pub fn times(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Real samples on a torus grid with a lazily computed spectrum.
pub struct ScalarField {
    grid: TorusGrid,
    data: Vec<f64>,
    spectrum: OnceLock<Arc<Vec<Complex64>>>,
}

impl Clone for ScalarField {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(Arc::clone(s));
        }
        Self { grid: self.grid.clone(), data: self.data.clone(), spectrum }
    }
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField").field("grid", &self.grid).field("len", &self.data.len()).finish()
    }
}

impl ScalarField {
    pub fn new(grid: &TorusGrid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(MaxlabError::GridMismatch(format!(
                "{} samples for a grid of {} points",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { grid: grid.clone(), data, spectrum: OnceLock::new() })
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Self { grid: grid.clone(), data: vec![0.0; grid.len()], spectrum: OnceLock::new() }
    }

    pub fn constant(grid: &TorusGrid, value: f64) -> Self {
        Self { grid: grid.clone(), data: vec![value; grid.len()], spectrum: OnceLock::new() }
    }

    /// Sample `f` at the grid points in the centered chart.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid: grid.clone(), data, spectrum: OnceLock::new() }
    }

    /// Build from Fourier-series coefficients; the imaginary residue is dropped.
    pub fn from_spectrum(grid: &TorusGrid, coeffs: Vec<Complex64>) -> Self {
        let data = grid.inverse_real(coeffs);
        Self { grid: grid.clone(), data, spectrum: OnceLock::new() }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.data
    }
    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    /// Mutable access drops the cached spectrum.
    pub fn values_mut(&mut self) -> &mut [f64] {
        self.spectrum = OnceLock::new();
        &mut self.data
    }

    pub fn spectrum(&self) -> Arc<Vec<Complex64>> {
        Arc::clone(self.spectrum.get_or_init(|| Arc::new(self.grid.forward(&self.data))))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(&self.grid, self.data.iter().map(|&v| f(v)).collect()).unwrap()
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.data.len(), other.data.len(), "zip_with on fields of different grids");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self::new(&self.grid, data).unwrap()
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &ScalarField) {
        for (y, &v) in self.values_mut().iter_mut().zip(&x.data) {
            *y += a * v;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Quadrature of `f^2` over the whole torus.
    pub fn l2_squared(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2(&self) -> f64 {
        self.l2_squared().sqrt()
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_volume()
    }

    /// The pulled-back field `f(R x)`.
    pub fn reflected(&self) -> Self {
        let data = (0..self.data.len()).map(|i| self.data[self.grid.reflect_flat(i)]).collect();
        Self::new(&self.grid, data).unwrap()
    }

    /// `max |f - s Rf| / max |f|` where `s` is the parity sign.
    pub fn parity_defect(&self, parity: Parity) -> f64 {
        let s = parity.sign();
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let worst = (0..self.data.len())
            .map(|i| (self.data[i] - s * self.data[self.grid.reflect_flat(i)]).abs())
            .fold(0.0, f64::max);
        worst / scale
    }

    /// Samples on the plane `index` of `axis`, in flat order of the remaining axes.
    pub fn plane(&self, axis: usize, index: usize) -> Vec<f64> {
        (0..self.data.len())
            .filter(|&i| self.grid.multi_index(i)[axis] == index)
            .map(|i| self.data[i])
            .collect()
    }
}

/// Electromagnetic state. 2D: `e = [E1, E2]`, `h = [H]`. 3D: three of each.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub time: f64,
    pub e: Vec<ScalarField>,
    pub h: Vec<ScalarField>,
}

impl FieldState {
    pub fn new(time: f64, e: Vec<ScalarField>, h: Vec<ScalarField>) -> Result<Self> {
        let Some(first) = e.first() else {
            return Err(MaxlabError::InvalidInput("state without components".into()));
        };
        let grid = first.grid().clone();
        let dim = grid.dim();
        let (ne, nh) = if dim == 2 { (2, 1) } else { (3, 3) };
        if e.len() != ne || h.len() != nh {
            return Err(MaxlabError::InvalidInput(format!(
                "{dim}D state needs {ne} E and {nh} H components, got {} and {}",
                e.len(),
                h.len()
            )));
        }
        for c in e.iter().chain(&h) {
            grid.same_as(c.grid())?;
        }
        Ok(Self { time, e, h })
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        let (ne, nh) = if grid.dim() == 2 { (2, 1) } else { (3, 3) };
        Self {
            time: 0.0,
            e: (0..ne).map(|_| ScalarField::zeros(grid)).collect(),
            h: (0..nh).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.e[0].grid()
    }
    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    pub fn components(&self) -> impl Iterator<Item = &ScalarField> {
        self.e.iter().chain(self.h.iter())
    }

    pub fn component_names(&self) -> Vec<&'static str> {
        if self.dim() == 2 {
            vec!["E1", "E2", "H"]
        } else {
            vec!["E1", "E2", "E3", "H1", "H2", "H3"]
        }
    }

    /// Largest absolute pointwise difference over all components.
    pub fn max_diff(&self, other: &FieldState) -> f64 {
        self.components()
            .zip(other.components())
            .map(|(a, b)| a.values().iter().zip(b.values()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.components().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn check_finite(&self) -> Result<()> {
        for (c, name) in self.components().zip(self.component_names()) {
            crate::error::ensure_finite(c.values(), name)?;
        }
        Ok(())
    }
}
