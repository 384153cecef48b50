//! Kerr medium `D = (1 + |E|^2) E`, `B = H`, flat metric.
//!
//! The constitutive law is inverted in closed form: `e = |E|` solves
//! `e^3 + e = |D|`, whose unique real root is
//! `e = (2/sqrt 3) sinh(asinh((3 sqrt 3 / 2) |D|) / 3)`, and `E = D / (1 + e^2)`.

use crate::coeffs::SymTensorField;
use crate::error::{MaxlabError, Result};
use crate::field::{FieldState, ScalarField};
use crate::grid::TorusGrid;
use crate::ops::divergence;

use super::{axpy_all, check_cfl, curl_e, curl_h, dot_all, EvolutionConfig, Integrator, Nonlinearity};

/// `|E|` from `|D|`.
pub fn kerr_root(d: f64) -> f64 {
    let s3 = 3f64.sqrt();
    2.0 / s3 * ((1.5 * s3 * d).asinh() / 3.0).sinh()
}

/// Pointwise `E` from `D` (any number of components).
pub fn invert_constitutive(d: &[ScalarField]) -> Result<Vec<ScalarField>> {
    let g = d[0].grid().clone();
    let len = g.len();
    let mut out = vec![vec![0.0; len]; d.len()];
    for p in 0..len {
        let m = d.iter().map(|c| c.values()[p].powi(2)).sum::<f64>().sqrt();
        if !m.is_finite() {
            return Err(MaxlabError::Inversion(format!("non-finite displacement at point {p}")));
        }
        let e = kerr_root(m);
        let f = 1.0 / (1.0 + e * e);
        for (o, c) in out.iter_mut().zip(d) {
            o[p] = c.values()[p] * f;
        }
    }
    out.into_iter().map(|v| ScalarField::new(&g, v)).collect()
}

/// `D = (1 + |E|^2) E`
pub fn displacement(e: &[ScalarField]) -> Vec<ScalarField> {
    let w = intensity(e).map(|v| 1.0 + v);
    e.iter().map(|c| c.zip_with(&w, |a, b| a * b)).collect()
}

/// `|E|^2`
pub fn intensity(e: &[ScalarField]) -> ScalarField {
    let mut acc = e[0].map(|v| v * v);
    for c in &e[1..] {
        acc = acc.zip_with(c, |a, b| a + b * b);
    }
    acc
}

/// `eps_1 = (1 + |E|^2) I + 2 E (x) E`, with eigenvalues `1 + 3|E|^2` and `1 + |E|^2`.
pub fn effective_permittivity(e: &[ScalarField]) -> SymTensorField {
    let n = e.len();
    let base = intensity(e).map(|v| 1.0 + v);
    let mut t = SymTensorField::zeros(e[0].grid(), n);
    for i in 0..n {
        for j in i..n {
            let mut c = e[i].zip_with(&e[j], |a, b| 2.0 * a * b);
            if i == j {
                c = c.zip_with(&base, |a, b| a + b);
            }
            t.set(i, j, c);
        }
    }
    t
}

#[derive(Debug, Clone)]
pub struct KerrMaxwell {
    grid: TorusGrid,
}

impl KerrMaxwell {
    /// The Kerr system proper is 2D; a 3D instance is only used for the
    /// cylindrical lift, where it is the isotropic form of the same law.
    pub fn new(grid: &TorusGrid) -> Self {
        Self { grid: grid.clone() }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Wave speed bound: the linearization around any state is no faster than vacuum.
    pub fn max_wave_speed(&self) -> f64 {
        1.0
    }

    pub fn evolve(
        &self,
        state: &FieldState,
        dt: f64,
        nsteps: usize,
        integrator: Integrator,
        mut observe: impl FnMut(usize, &FieldState) -> Result<()>,
    ) -> Result<FieldState> {
        self.grid.same_as(state.grid())?;
        check_cfl(&self.grid, 1.0, dt, integrator)?;
        let mut d = displacement(&state.e);
        let mut h = state.h.clone();
        let mut e = state.e.clone();
        let mut ce: Option<Vec<ScalarField>> = None;
        let mut out = state.clone();
        for k in 1..=nsteps {
            match integrator {
                Integrator::Leapfrog => {
                    let c0 = ce.take().unwrap_or_else(|| curl_e(&e));
                    axpy_all(&mut h, -0.5 * dt, &c0);
                    axpy_all(&mut d, dt, &curl_h(&h));
                    e = invert_constitutive(&d)?;
                    let c1 = curl_e(&e);
                    axpy_all(&mut h, -0.5 * dt, &c1);
                    ce = Some(c1);
                }
                Integrator::Rk4 => {
                    let rhs = |d: &[ScalarField], h: &[ScalarField]| -> Result<(Vec<ScalarField>, Vec<ScalarField>)> {
                        let e = invert_constitutive(d)?;
                        Ok((curl_h(h), curl_e(&e).into_iter().map(|f| f.scaled(-1.0)).collect()))
                    };
                    let stage = |s: f64, kd: &[ScalarField], kh: &[ScalarField]| {
                        let mut dd = d.clone();
                        let mut hh = h.clone();
                        axpy_all(&mut dd, s, kd);
                        axpy_all(&mut hh, s, kh);
                        (dd, hh)
                    };
                    let (k1d, k1h) = rhs(&d, &h)?;
                    let (d2, h2) = stage(0.5 * dt, &k1d, &k1h);
                    let (k2d, k2h) = rhs(&d2, &h2)?;
                    let (d3, h3) = stage(0.5 * dt, &k2d, &k2h);
                    let (k3d, k3h) = rhs(&d3, &h3)?;
                    let (d4, h4) = stage(dt, &k3d, &k3h);
                    let (k4d, k4h) = rhs(&d4, &h4)?;
                    for (kd, kh, w) in [(&k1d, &k1h, 1.0), (&k2d, &k2h, 2.0), (&k3d, &k3h, 2.0), (&k4d, &k4h, 1.0)] {
                        axpy_all(&mut d, dt * w / 6.0, kd);
                        axpy_all(&mut h, dt * w / 6.0, kh);
                    }
                    e = invert_constitutive(&d)?;
                }
            }
            out = FieldState::new(state.time + k as f64 * dt, e.clone(), h.clone())?;
            out.check_finite()?;
            observe(k, &out)?;
        }
        Ok(out)
    }

    /// `(<D, E> + <H, H>) / 2` on the half space.
    pub fn energy(&self, state: &FieldState) -> f64 {
        0.5 * (dot_all(&displacement(&state.e), &state.e) + dot_all(&state.h, &state.h))
    }

    /// The conserved Hamiltonian `int |E|^2/2 + 3|E|^4/4 + |H|^2/2`, halved for the torus.
    pub fn hamiltonian(&self, state: &FieldState) -> f64 {
        let i = intensity(&state.e);
        let w = i.map(|v| 0.5 * v + 0.75 * v * v);
        let hh: f64 = state.h.iter().map(|f| f.l2_squared()).sum();
        0.5 * (w.values().iter().sum::<f64>() * self.grid.cell_volume() + 0.5 * hh)
    }

    /// `rho_e = div D`.
    pub fn charge(&self, state: &FieldState) -> ScalarField {
        divergence(&displacement(&state.e))
    }
}

/// One Kerr step with the step size of `config`.
pub fn step_kerr_2d(state: &FieldState, config: &EvolutionConfig) -> Result<FieldState> {
    if config.nonlinearity != Nonlinearity::Kerr2d {
        return Err(MaxlabError::InvalidInput("step_kerr_2d needs the Kerr configuration".into()));
    }
    let g = state.grid();
    let (dt, _) = config.step_plan(g, 1.0)?;
    KerrMaxwell::new(g).evolve(state, dt, 1, config.integrator, |_, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_examples() {
        assert!((kerr_root(2.0) - 1.0).abs() < 1e-15);
        assert_eq!(kerr_root(0.0), 0.0);
        for d in [1e-9, 1e-3, 0.3, 5.0, 1e4] {
            let e = kerr_root(d);
            assert!((e * e * e + e - d).abs() <= 1e-13 * d.max(1.0));
        }
    }

    #[test]
    fn permittivity_of_unit_field() {
        let g = TorusGrid::cube(2, 4, 1.0).unwrap();
        let e = vec![ScalarField::constant(&g, 1.0), ScalarField::zeros(&g)];
        let t = effective_permittivity(&e);
        assert_eq!(t.at2(0), nalgebra::Matrix2::new(4.0, 0.0, 0.0, 2.0));
    }
}
