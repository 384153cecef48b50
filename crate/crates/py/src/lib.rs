//! Python bindings: grids, states, coefficient presets, the linear and Kerr
//! solvers and the scalar diagnostics. Fields cross the boundary as flat
//! row-major lists.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use maxlab_core::diagnostics::{admissible as core_admissible, energy_m};
use maxlab_core::evolution::kerr::kerr_root as core_kerr_root;
use maxlab_core::evolution::presets::{packet_2d, random_state, standing_wave, CoefficientPreset, DataKind};
use maxlab_core::evolution::{charge, Integrator, KerrMaxwell, LinearMaxwell};
use maxlab_core::io::{read_snapshot, write_snapshot};
use maxlab_core::norms::{lq_norm, sobolev_norm_vec};
use maxlab_core::symbol::factorization_residual;
use maxlab_core::{CoefficientSet, FieldState, MaxlabError, ScalarField, TorusGrid};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: MaxlabError) -> PyErr {
    match e {
        MaxlabError::InvalidInput(_) | MaxlabError::Inadmissible(_) | MaxlabError::Cfl { .. } | MaxlabError::GridMismatch(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn integrator(name: &str) -> PyResult<Integrator> {
    match name {
        "leapfrog" => Ok(Integrator::Leapfrog),
        "rk4" => Ok(Integrator::Rk4),
        other => Err(PyValueError::new_err(format!("unknown integrator '{other}'"))),
    }
}

#[pyclass(name = "Grid", module = "maxlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid(TorusGrid);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (shape, lengths, normal_axis = None))]
    fn new(shape: Vec<usize>, lengths: Vec<f64>, normal_axis: Option<usize>) -> PyResult<Self> {
        let axis = normal_axis.unwrap_or(shape.len().saturating_sub(1));
        TorusGrid::new(&shape, &lengths, axis).map(Self).map_err(err)
    }

    /// `n` points per axis on a cube of side `length`, normal axis last.
    #[staticmethod]
    fn cube(dim: usize, n: usize, length: f64) -> PyResult<Self> {
        TorusGrid::cube(dim, n, length).map(Self).map_err(err)
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.0.shape().to_vec()
    }

    #[getter]
    fn lengths(&self) -> Vec<f64> {
        self.0.lengths().to_vec()
    }

    #[getter]
    fn normal_axis(&self) -> usize {
        self.0.normal_axis()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Grid(shape={:?}, lengths={:?}, normal_axis={})", self.0.shape(), self.0.lengths(), self.0.normal_axis())
    }
}

#[pyclass(name = "Coefficients", module = "maxlab", frozen)]
struct PyCoefficients(CoefficientSet);

#[pymethods]
impl PyCoefficients {
    /// Presets: "flat", "smooth", "geodesic", "kink".
    #[staticmethod]
    #[pyo3(signature = (grid, name = "flat", amplitude = 0.2))]
    fn preset(grid: &PyGrid, name: &str, amplitude: f64) -> PyResult<Self> {
        CoefficientPreset::parse(name, amplitude).and_then(|p| p.build(&grid.0)).map(Self).map_err(err)
    }

    /// Isotropic `epsilon`, `mu` samples with the Euclidean metric.
    #[staticmethod]
    fn isotropic(grid: &PyGrid, epsilon: Vec<f64>, mu: Vec<f64>) -> PyResult<Self> {
        let flat = CoefficientSet::flat(&grid.0);
        let e = ScalarField::new(&grid.0, epsilon).map_err(err)?;
        let m = ScalarField::new(&grid.0, mu).map_err(err)?;
        CoefficientSet::from_parts(e, m, flat.cometric.clone()).map(Self).map_err(err)
    }

    /// `(min, max)` eigenvalue bounds of the media.
    fn ellipticity(&self) -> (f64, f64) {
        self.0.ellipticity()
    }

    fn max_wave_speed(&self) -> PyResult<f64> {
        self.0.max_wave_speed().map_err(err)
    }
}

#[pyclass(name = "State", module = "maxlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyState(FieldState);

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (grid, e, h, time = 0.0))]
    fn new(grid: &PyGrid, e: Vec<Vec<f64>>, h: Vec<Vec<f64>>, time: f64) -> PyResult<Self> {
        let conv = |v: Vec<Vec<f64>>| v.into_iter().map(|c| ScalarField::new(&grid.0, c)).collect::<Result<Vec<_>, _>>();
        FieldState::new(time, conv(e).map_err(err)?, conv(h).map_err(err)?).map(Self).map_err(err)
    }

    /// Band-limited random data with support in `(lo/2, hi)`.
    /// `kind` is "general", "divergence-free" or "charged".
    #[staticmethod]
    #[pyo3(signature = (grid, coeffs, seed, lo, hi, kind = "general"))]
    fn random(grid: &PyGrid, coeffs: &PyCoefficients, seed: u64, lo: f64, hi: f64, kind: &str) -> PyResult<Self> {
        let kind = match kind {
            "general" => DataKind::General,
            "divergence-free" => DataKind::DivergenceFree,
            "charged" => DataKind::Charged,
            other => return Err(PyValueError::new_err(format!("unknown data kind '{other}'"))),
        };
        random_state(&grid.0, &coeffs.0, seed, lo, hi, kind).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (grid, modes, t = 0.0))]
    fn standing_wave(grid: &PyGrid, modes: [i64; 2], t: f64) -> PyResult<Self> {
        standing_wave(&grid.0, modes, t).map(Self).map_err(err)
    }

    #[staticmethod]
    fn packet(grid: &PyGrid, center: [f64; 2], width: f64, k: f64) -> PyResult<Self> {
        packet_2d(&grid.0, center, width, k).map(Self).map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let f = File::open(path).map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        read_snapshot(BufReader::new(f)).map(Self).map_err(err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        let f = File::create(path).map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        write_snapshot(BufWriter::new(f), &self.0).map_err(err)
    }

    #[getter]
    fn time(&self) -> f64 {
        self.0.time
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(self.0.grid().clone())
    }

    #[getter]
    fn e(&self) -> Vec<Vec<f64>> {
        self.0.e.iter().map(|c| c.values().to_vec()).collect()
    }

    #[getter]
    fn h(&self) -> Vec<Vec<f64>> {
        self.0.h.iter().map(|c| c.values().to_vec()).collect()
    }

    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    fn max_diff(&self, other: &PyState) -> f64 {
        self.0.max_diff(&other.0)
    }

    /// `||(E, H)||_{H^s}` over the torus.
    fn sobolev_norm(&self, s: f64) -> PyResult<f64> {
        let comps: Vec<&ScalarField> = self.0.components().collect();
        sobolev_norm_vec(&comps, s).map_err(err)
    }

    fn lq_norm(&self, q: f64) -> PyResult<f64> {
        let comps: Vec<&ScalarField> = self.0.components().collect();
        lq_norm(&comps, q).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("State(dim={}, t={}, shape={:?})", self.0.dim(), self.0.time, self.0.grid().shape())
    }
}

#[pyclass(name = "LinearSolver", module = "maxlab", frozen)]
struct PyLinear(LinearMaxwell);

#[pymethods]
impl PyLinear {
    #[new]
    fn new(coeffs: &PyCoefficients) -> PyResult<Self> {
        LinearMaxwell::new(&coeffs.0).map(Self).map_err(err)
    }

    /// Advance `steps` steps of size `dt`; negative `dt` runs backwards.
    #[pyo3(signature = (state, dt, steps, integrator = "leapfrog"))]
    fn evolve(&self, py: Python<'_>, state: &PyState, dt: f64, steps: usize, integrator: &str) -> PyResult<PyState> {
        let i = self::integrator(integrator)?;
        let s = &state.0;
        py.detach(|| self.0.evolve(s, dt, steps, i, |_, _| Ok(()))).map(PyState).map_err(err)
    }

    fn max_wave_speed(&self) -> PyResult<f64> {
        self.0.max_wave_speed().map_err(err)
    }

    fn energy(&self, state: &PyState) -> f64 {
        self.0.energy(&state.0)
    }

    /// The quantity leapfrog conserves exactly at step `dt`.
    fn discrete_energy(&self, state: &PyState, dt: f64) -> f64 {
        self.0.discrete_energy(&state.0, dt)
    }

    fn charge(&self, state: &PyState) -> Vec<f64> {
        self.0.charge(&state.0).into_values()
    }
}

#[pyclass(name = "KerrSolver", module = "maxlab", frozen)]
struct PyKerr(KerrMaxwell);

#[pymethods]
impl PyKerr {
    #[new]
    fn new(grid: &PyGrid) -> Self {
        Self(KerrMaxwell::new(&grid.0))
    }

    #[pyo3(signature = (state, dt, steps, integrator = "rk4"))]
    fn evolve(&self, py: Python<'_>, state: &PyState, dt: f64, steps: usize, integrator: &str) -> PyResult<PyState> {
        let i = self::integrator(integrator)?;
        let s = &state.0;
        py.detach(|| self.0.evolve(s, dt, steps, i, |_, _| Ok(()))).map(PyState).map_err(err)
    }

    fn hamiltonian(&self, state: &PyState) -> f64 {
        self.0.hamiltonian(&state.0)
    }

    fn charge(&self, state: &PyState) -> Vec<f64> {
        self.0.charge(&state.0).into_values()
    }
}

/// Energy functional `M` of a state in a medium.
#[pyfunction]
fn energy(state: &PyState, coeffs: &PyCoefficients) -> PyResult<f64> {
    energy_m(&state.0, &coeffs.0).map_err(err)
}

/// Charge density `div D` of a state.
#[pyfunction]
fn charge_density(state: &PyState, coeffs: &PyCoefficients) -> Vec<f64> {
    charge(&state.0, &coeffs.0).into_values()
}

/// Real root `e` of `e + e^3 = d`.
#[pyfunction]
fn kerr_root(d: f64) -> f64 {
    core_kerr_root(d)
}

/// `gamma`, `delta` and `delta_max` for admissible exponents.
#[pyfunction]
fn admissible<'py>(py: Python<'py>, p: f64, q: f64, dim: usize) -> PyResult<Bound<'py, PyDict>> {
    let t = core_admissible(p, q, dim).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("p", t.p)?;
    d.set_item("q", t.q)?;
    d.set_item("gamma", t.gamma)?;
    d.set_item("delta", t.delta)?;
    d.set_item("delta_max", t.delta_max)?;
    Ok(d)
}

/// Worst factorization residual per branch over `samples` annulus points.
#[pyfunction]
#[pyo3(signature = (coeffs, lam, samples = 200, seed = 0))]
fn factorization_residuals<'py>(py: Python<'py>, coeffs: &PyCoefficients, lam: f64, samples: usize, seed: u64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let rows = factorization_residual(&coeffs.0, lam, samples, seed).map_err(err)?;
    rows.into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("branch", r.branch)?;
            d.set_item("samples", r.samples)?;
            d.set_item("max_residual", r.max_residual)?;
            d.set_item("max_orthonormality_defect", r.max_orthonormality_defect)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn maxlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyCoefficients>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyLinear>()?;
    m.add_class::<PyKerr>()?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(charge_density, m)?)?;
    m.add_function(wrap_pyfunction!(kerr_root, m)?)?;
    m.add_function(wrap_pyfunction!(admissible, m)?)?;
    m.add_function(wrap_pyfunction!(factorization_residuals, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
