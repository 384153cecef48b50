//! Time stepping for the reflected linear system and the 2D Kerr system.
//!
//! The linear solver advances the conservative pair `D' = eps' E`, `B' = mu' H`
//!
//! `d_t D' = curl H - J`, `d_t B' = -curl E`
//!
//! with spectral curls and recovers `E`, `H` pointwise. In 2D the curl of the
//! scalar `H` is the perpendicular gradient `(d2 H, -d1 H)`.

pub mod cylinder;
pub mod kerr;
pub mod presets;

use serde::Serialize;

use crate::coeffs::{CoefficientSet, SymTensorField};
use crate::error::{MaxlabError, Result};
use crate::field::{FieldState, ScalarField};
use crate::grid::TorusGrid;
use crate::ops::{curl, divergence, perp_grad};
use crate::reflect::{ParityPlan, TRACE_TOL};

pub use cylinder::{cylindrical_lift_and_compare, CylinderConfig, CylinderReport};
pub use kerr::{effective_permittivity, invert_constitutive, step_kerr_2d, KerrMaxwell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Integrator {
    /// Kick-drift-kick on `(D, B)`: half kick of `B`, full drift of `D`, half kick of `B`.
    Leapfrog,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Nonlinearity {
    None,
    Kerr2d,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionConfig {
    /// Fraction of `h_min / (c_max sqrt(d))`.
    pub cfl: f64,
    pub t_final: f64,
    /// Overrides the CFL-derived step when set.
    pub dt: Option<f64>,
    pub integrator: Integrator,
    pub nonlinearity: Nonlinearity,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { cfl: 0.4, t_final: 1.0, dt: None, integrator: Integrator::Leapfrog, nonlinearity: Nonlinearity::None }
    }
}

impl EvolutionConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(MaxlabError::InvalidInput(format!("cfl fraction {} not in (0, 0.5]", self.cfl)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(MaxlabError::InvalidInput(format!("final time {}", self.t_final)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(MaxlabError::InvalidInput(format!("dt = {dt}")));
            }
        }
        if self.nonlinearity == Nonlinearity::Kerr2d && dim != 2 {
            return Err(MaxlabError::InvalidInput("the Kerr system is two dimensional".into()));
        }
        Ok(())
    }

    /// Step size and step count; the step is shrunk so that `n dt = T` exactly.
    pub fn step_plan(&self, grid: &TorusGrid, c_max: f64) -> Result<(f64, usize)> {
        self.validate(grid.dim())?;
        let d = grid.dim() as f64;
        let dt0 = self.dt.unwrap_or(self.cfl * grid.min_spacing() / (c_max * d.sqrt()));
        if self.t_final == 0.0 {
            return Ok((dt0, 0));
        }
        let n = (self.t_final / dt0 - 1e-9).ceil().max(1.0) as usize;
        let dt = self.t_final / n as f64;
        check_cfl(grid, c_max, dt, self.integrator)?;
        Ok((dt, n))
    }
}

/// Reject steps beyond the stability interval of the integrator for the
/// fastest resolved mode: `dt omega_max < 2` (leapfrog), `< 2 sqrt 2` (RK4).
pub fn check_cfl(grid: &TorusGrid, c_max: f64, dt: f64, integrator: Integrator) -> Result<()> {
    let bound = match integrator {
        Integrator::Leapfrog => 2.0,
        Integrator::Rk4 => 2.0 * 2f64.sqrt(),
    };
    let max = bound / (c_max * grid.max_deriv_xi_norm());
    if dt.abs() >= max {
        return Err(MaxlabError::Cfl { dt, max });
    }
    Ok(())
}

/// Curl acting on `E`-type fields: three components in 3D, the scalar curl in 2D.
pub(crate) fn curl_e(e: &[ScalarField]) -> Vec<ScalarField> {
    curl(e)
}

/// Curl acting on `H`-type fields.
pub(crate) fn curl_h(h: &[ScalarField]) -> Vec<ScalarField> {
    if h.len() == 1 {
        perp_grad(&h[0])
    } else {
        curl(h)
    }
}

fn axpy_all(y: &mut [ScalarField], a: f64, x: &[ScalarField]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        yi.axpy(a, xi);
    }
}

fn dot_all(a: &[ScalarField], b: &[ScalarField]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// Linear solver with precomputed pointwise inverses.
#[derive(Debug, Clone)]
pub struct LinearMaxwell {
    coeffs: CoefficientSet,
    eps_inv: SymTensorField,
    mu_inv: SymTensorField,
    forcing: Option<Vec<ScalarField>>,
}

impl LinearMaxwell {
    pub fn new(coeffs: &CoefficientSet) -> Result<Self> {
        let eps_inv = coeffs
            .eps_prime
            .inverse()
            .map_err(|e| MaxlabError::Inversion(format!("permittivity: {e}")))?;
        let mu_inv = coeffs.mu_prime.inverse().map_err(|e| MaxlabError::Inversion(format!("permeability: {e}")))?;
        Ok(Self { coeffs: coeffs.clone(), eps_inv, mu_inv, forcing: None })
    }

    /// Time-independent current in the conservative frame. It must follow the
    /// electric parity plan and have vanishing normal trace.
    pub fn with_forcing(mut self, j: Vec<ScalarField>) -> Result<Self> {
        let g = self.grid().clone();
        if j.len() != g.dim() {
            return Err(MaxlabError::InvalidInput(format!("forcing needs {} components", g.dim())));
        }
        let plan = ParityPlan::for_grid(&g);
        for (c, (f, &p)) in j.iter().zip(&plan.j).enumerate() {
            g.same_as(f.grid())?;
            if f.parity_defect(p) > 1e-12 {
                return Err(MaxlabError::InvalidInput(format!("forcing component {} breaks its parity", c + 1)));
            }
        }
        let a = g.normal_axis();
        let trace = j[a].plane(a, 0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if trace > TRACE_TOL * j[a].max_abs().max(1.0) {
            return Err(MaxlabError::InvalidInput(format!("normal current has boundary trace {trace:.3e}")));
        }
        self.forcing = Some(j);
        Ok(self)
    }

    pub fn coeffs(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.coeffs.grid
    }

    pub fn max_wave_speed(&self) -> Result<f64> {
        self.coeffs.max_wave_speed()
    }

    pub fn displacement(&self, e: &[ScalarField]) -> Vec<ScalarField> {
        self.coeffs.eps_prime.apply(e)
    }

    pub fn induction(&self, h: &[ScalarField]) -> Vec<ScalarField> {
        self.coeffs.mu_prime.apply(h)
    }

    pub fn electric(&self, d: &[ScalarField]) -> Vec<ScalarField> {
        self.eps_inv.apply(d)
    }

    pub fn magnetic(&self, b: &[ScalarField]) -> Vec<ScalarField> {
        self.mu_inv.apply(b)
    }

    fn drift(&self, d: &mut [ScalarField], b: &[ScalarField], dt: f64) {
        let ch = curl_h(&self.magnetic(b));
        axpy_all(d, dt, &ch);
        if let Some(j) = &self.forcing {
            axpy_all(d, -dt, j);
        }
    }

    /// `(dD, dB)` at the given conservative state.
    fn rhs(&self, d: &[ScalarField], b: &[ScalarField]) -> (Vec<ScalarField>, Vec<ScalarField>) {
        let mut dd = curl_h(&self.magnetic(b));
        if let Some(j) = &self.forcing {
            axpy_all(&mut dd, -1.0, j);
        }
        let db = curl_e(&self.electric(d)).into_iter().map(|f| f.scaled(-1.0)).collect();
        (dd, db)
    }

    /// Advance `nsteps` steps of size `dt` (negative `dt` runs backwards),
    /// calling `observe` after every step.
    pub fn evolve(
        &self,
        state: &FieldState,
        dt: f64,
        nsteps: usize,
        integrator: Integrator,
        mut observe: impl FnMut(usize, &FieldState) -> Result<()>,
    ) -> Result<FieldState> {
        self.grid().same_as(state.grid())?;
        check_cfl(self.grid(), self.max_wave_speed()?, dt, integrator)?;
        let mut d = self.displacement(&state.e);
        let mut b = self.induction(&state.h);
        let mut t = state.time;
        // curl E carried between steps so each leapfrog step costs two curls
        let mut ce: Option<Vec<ScalarField>> = None;
        for k in 1..=nsteps {
            match integrator {
                Integrator::Leapfrog => {
                    let c0 = match ce.take() {
                        Some(c) => c,
                        None => curl_e(&self.electric(&d)),
                    };
                    axpy_all(&mut b, -0.5 * dt, &c0);
                    self.drift(&mut d, &b, dt);
                    let c1 = curl_e(&self.electric(&d));
                    axpy_all(&mut b, -0.5 * dt, &c1);
                    ce = Some(c1);
                }
                Integrator::Rk4 => {
                    let (k1d, k1b) = self.rhs(&d, &b);
                    let stage = |s: f64, kd: &[ScalarField], kb: &[ScalarField]| {
                        let mut dd = d.clone();
                        let mut bb = b.clone();
                        axpy_all(&mut dd, s, kd);
                        axpy_all(&mut bb, s, kb);
                        (dd, bb)
                    };
                    let (d2, b2) = stage(0.5 * dt, &k1d, &k1b);
                    let (k2d, k2b) = self.rhs(&d2, &b2);
                    let (d3, b3) = stage(0.5 * dt, &k2d, &k2b);
                    let (k3d, k3b) = self.rhs(&d3, &b3);
                    let (d4, b4) = stage(dt, &k3d, &k3b);
                    let (k4d, k4b) = self.rhs(&d4, &b4);
                    for (kd, kb, w) in [(&k1d, &k1b, 1.0), (&k2d, &k2b, 2.0), (&k3d, &k3b, 2.0), (&k4d, &k4b, 1.0)] {
                        axpy_all(&mut d, dt * w / 6.0, kd);
                        axpy_all(&mut b, dt * w / 6.0, kb);
                    }
                }
            }
            t = state.time + k as f64 * dt;
            let s = FieldState::new(t, self.electric(&d), self.magnetic(&b))?;
            s.check_finite()?;
            observe(k, &s)?;
            if k == nsteps {
                return Ok(s);
            }
        }
        let mut out = state.clone();
        out.time = t;
        Ok(out)
    }

    pub fn step(&self, state: &FieldState, dt: f64, integrator: Integrator) -> Result<FieldState> {
        self.evolve(state, dt, 1, integrator, |_, _| Ok(()))
    }

    /// `(<D', E> + <B', H>) / 2` over the torus, i.e. the half-space energy.
    pub fn energy(&self, state: &FieldState) -> f64 {
        0.5 * (dot_all(&self.displacement(&state.e), &state.e) + dot_all(&self.induction(&state.h), &state.h))
    }

    /// The quadratic form conserved exactly by leapfrog with step `dt`:
    /// `M - (dt^2/4) <curl E, mu'^{-1} curl E> / 2`.
    pub fn discrete_energy(&self, state: &FieldState, dt: f64) -> f64 {
        let ce = curl_e(&state.e);
        self.energy(state) - 0.125 * dt * dt * dot_all(&self.magnetic(&ce), &ce)
    }

    pub fn charge(&self, state: &FieldState) -> ScalarField {
        charge(state, &self.coeffs)
    }
}

/// One step of the linear system with the step size of `config`.
pub fn step_linear(state: &FieldState, coeffs: &CoefficientSet, config: &EvolutionConfig) -> Result<FieldState> {
    if config.nonlinearity != Nonlinearity::None {
        return Err(MaxlabError::InvalidInput("step_linear called with a nonlinear configuration".into()));
    }
    let solver = LinearMaxwell::new(coeffs)?;
    let (dt, _) = config.step_plan(&coeffs.grid, solver.max_wave_speed()?)?;
    solver.step(state, dt, config.integrator)
}

/// `rho_e = div(sqrt(g) g^{-1} eps E) / sqrt(g)`.
pub fn charge(state: &FieldState, coeffs: &CoefficientSet) -> ScalarField {
    let d = coeffs.eps_prime.apply(&state.e);
    divergence(&d).zip_with(&coeffs.sqrt_g, |a, s| a / s)
}

/// `||rho(t) - rho(0)|| / max(||rho(0)||, k_max ||D(0)||)`; the second scale
/// keeps the measure meaningful for charge-free data.
pub fn charge_drift(rho0: &ScalarField, rho: &ScalarField, d0_l2: f64) -> f64 {
    let diff = rho.zip_with(rho0, |a, b| a - b).l2();
    let scale = rho0.l2().max(d0_l2 * rho0.grid().max_deriv_xi_norm());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// L2 norm of all displacement components.
pub fn vector_l2(v: &[ScalarField]) -> f64 {
    v.iter().map(|f| f.l2_squared()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_stays_zero() {
        let g = TorusGrid::cube(2, 16, 2.0 * PI).unwrap();
        let s = LinearMaxwell::new(&CoefficientSet::flat(&g)).unwrap();
        let out = s.evolve(&FieldState::zeros(&g), 0.05, 10, Integrator::Leapfrog, |_, _| Ok(())).unwrap();
        assert_eq!(out.max_abs(), 0.0);
        assert!((out.time - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cfl_guard() {
        let g = TorusGrid::cube(2, 16, 2.0 * PI).unwrap();
        let s = LinearMaxwell::new(&CoefficientSet::flat(&g)).unwrap();
        let e = s.step(&FieldState::zeros(&g), 1.0, Integrator::Leapfrog);
        assert!(matches!(e, Err(MaxlabError::Cfl { .. })));
    }

    #[test]
    fn kerr_config_needs_2d() {
        let c = EvolutionConfig { nonlinearity: Nonlinearity::Kerr2d, ..Default::default() };
        assert!(c.validate(3).is_err());
        assert!(c.validate(2).is_ok());
        assert!(EvolutionConfig { cfl: 0.7, ..Default::default() }.validate(2).is_err());
    }

    #[test]
    fn plan_lands_on_final_time() {
        let g = TorusGrid::cube(2, 16, 2.0 * PI).unwrap();
        let (dt, n) = EvolutionConfig { t_final: 1.0, ..Default::default() }.step_plan(&g, 1.0).unwrap();
        assert!((dt * n as f64 - 1.0).abs() < 1e-14);
    }
}
