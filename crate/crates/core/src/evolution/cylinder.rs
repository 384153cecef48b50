//! Lift of 2D data to a 3D cylinder `x3`-independent on a plateau, run both
//! systems with the same step, and compare on the plane `x3 = 0`.
//!
//! The 2D grid has its normal axis last (`x2`); the 3D grid keeps `x2` as the
//! normal axis and appends the cylinder axis `x3`. The lift is
//! `E~ = phi(x3) (E1, E2, 0)`, `H~ = phi(x3) (0, 0, H)`.

use serde::Serialize;

use crate::coeffs::{CoefficientSet, SymTensorField};
use crate::error::{MaxlabError, Result};
use crate::field::{FieldState, ScalarField};
use crate::grid::TorusGrid;
use crate::ops::derivative;

use super::kerr::KerrMaxwell;
use super::{Integrator, LinearMaxwell, Nonlinearity};

/// Number of ramp widths between the plateau edge and where `phi` is exactly 1 to rounding.
const TAIL: f64 = 6.0;

#[derive(Debug, Clone, Serialize)]
pub struct CylinderConfig {
    pub t_final: f64,
    pub cfl: f64,
    pub n3: usize,
    pub length3: f64,
    /// Half-width of the cutoff `phi`.
    pub plateau: f64,
    /// Width of the error-function ramps of `phi`.
    pub ramp: f64,
    pub nonlinearity: Nonlinearity,
    /// Compare every this many steps (the final step is always compared).
    pub compare_every: usize,
}

impl CylinderConfig {
    /// Geometry that resolves the ramps with `n3` points and keeps the plateau
    /// ahead of the causal cone of `[0, T]` for unit wave speed.
    pub fn for_horizon(t_final: f64, n3: usize) -> Result<Self> {
        // ramp resolved when ramp * k_max / 2 >= TAIL, k_max = pi n3 / L3,
        // and L3 = 2 (plateau + TAIL ramp) with plateau = T + TAIL ramp + 1/4
        let denom = std::f64::consts::PI * n3 as f64 - 8.0 * TAIL * TAIL;
        if denom <= 0.0 {
            return Err(MaxlabError::InvalidInput(format!("n3 = {n3} too coarse to resolve the cylinder cutoff")));
        }
        let ramp = 2.0 * TAIL * (2.0 * t_final + 0.5) / denom;
        let plateau = t_final + TAIL * ramp + 0.25;
        Ok(Self {
            t_final,
            cfl: 0.4,
            n3,
            length3: 2.0 * (plateau + TAIL * ramp),
            plateau,
            ramp,
            nonlinearity: Nonlinearity::None,
            compare_every: 1,
        })
    }

    fn validate(&self, c_max: f64) -> Result<()> {
        if self.plateau - TAIL * self.ramp <= c_max * self.t_final {
            return Err(MaxlabError::SupportMargin(format!(
                "plateau {} with ramp {} does not cover the cone of radius {} at T = {}",
                self.plateau,
                self.ramp,
                c_max * self.t_final,
                self.t_final
            )));
        }
        if self.length3 / 2.0 < self.plateau + TAIL * self.ramp {
            return Err(MaxlabError::SupportMargin("cutoff does not decay before the seam of the x3 period".into()));
        }
        if self.n3 % 2 != 0 || self.n3 == 0 {
            return Err(MaxlabError::InvalidInput("n3 must be even".into()));
        }
        Ok(())
    }

    /// `phi(x) = (erf((x + R)/s) - erf((x - R)/s)) / 2`
    pub fn cutoff(&self, x: f64) -> f64 {
        0.5 * (libm::erf((x + self.plateau) / self.ramp) - libm::erf((x - self.plateau) / self.ramp))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CylinderReport {
    pub dt: f64,
    pub steps: usize,
    /// `sup_t ||u3(t)|_{x3=0} - u2(t)||_{L2}` over the compared times.
    pub discrepancy: f64,
    /// The same divided by `sup_t ||u2(t)||_{L2}`.
    pub relative_discrepancy: f64,
    /// `max |d3 (E1~, E2~, H3~)|` over `|x3| <= plateau - TAIL ramp` at `t = 0`.
    pub plateau_derivative: f64,
}

fn lift_grid(g2: &TorusGrid, cfg: &CylinderConfig) -> Result<TorusGrid> {
    if g2.dim() != 2 || g2.normal_axis() != 1 {
        return Err(MaxlabError::InvalidInput("cylinder lift expects a 2D grid with normal axis 1".into()));
    }
    TorusGrid::new(
        &[g2.shape()[0], g2.shape()[1], cfg.n3],
        &[g2.lengths()[0], g2.lengths()[1], cfg.length3],
        1,
    )
}

fn lift(f: &ScalarField, g3: &TorusGrid, phi: &[f64]) -> ScalarField {
    let n3 = phi.len();
    let v = f.values();
    let data = (0..g3.len()).map(|p| v[p / n3] * phi[p % n3]).collect();
    ScalarField::new(g3, data).expect("lifted length")
}

fn lift_uniform(f: &ScalarField, g3: &TorusGrid) -> ScalarField {
    lift(f, g3, &vec![1.0; g3.shape()[2]])
}

/// 3D medium constant in `x3`, with `g33 = 1` and no mixing with `x3`.
fn lift_coefficients(c2: &CoefficientSet, g3: &TorusGrid) -> Result<CoefficientSet> {
    let mut cm = SymTensorField::zeros(g3, 3);
    for i in 0..2 {
        for j in i..2 {
            cm.set(i, j, lift_uniform(c2.cometric.get(i, j), g3));
        }
    }
    cm.set(2, 2, ScalarField::constant(g3, 1.0));
    CoefficientSet::from_parts(lift_uniform(&c2.epsilon, g3), lift_uniform(&c2.mu, g3), cm)
}

/// Values on the plane `x3 = 0`, in 2D flat order.
fn plane0(f: &ScalarField) -> Vec<f64> {
    f.plane(2, 0)
}

fn plane_l2_sq(v: &[f64], g2: &TorusGrid) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>() * g2.cell_volume()
}

pub fn cylindrical_lift_and_compare(state2d: &FieldState, coeffs2d: &CoefficientSet, cfg: &CylinderConfig) -> Result<CylinderReport> {
    let g2 = state2d.grid().clone();
    let g3 = lift_grid(&g2, cfg)?;
    let kerr = cfg.nonlinearity == Nonlinearity::Kerr2d;
    let lin2 = if kerr { None } else { Some(LinearMaxwell::new(coeffs2d)?) };
    let coeffs3 = if kerr { None } else { Some(lift_coefficients(coeffs2d, &g3)?) };
    let lin3 = coeffs3.as_ref().map(LinearMaxwell::new).transpose()?;
    let c_max = match (&lin2, &lin3) {
        (Some(a), Some(b)) => a.max_wave_speed()?.max(b.max_wave_speed()?),
        _ => 1.0,
    };
    cfg.validate(c_max)?;

    let phi: Vec<f64> = (0..cfg.n3).map(|i| cfg.cutoff(g3.centered_coord(2, i))).collect();
    let z = ScalarField::zeros(&g3);
    let s3 = FieldState::new(
        state2d.time,
        vec![lift(&state2d.e[0], &g3, &phi), lift(&state2d.e[1], &g3, &phi), z.clone()],
        vec![z.clone(), z, lift(&state2d.h[0], &g3, &phi)],
    )?;

    let inner = cfg.plateau - TAIL * cfg.ramp;
    let mut plateau_derivative = 0.0f64;
    for f in [&s3.e[0], &s3.e[1], &s3.h[2]] {
        let d = derivative(f, 2);
        for (p, v) in d.values().iter().enumerate() {
            if g3.centered_coord(2, p % cfg.n3).abs() <= inner {
                plateau_derivative = plateau_derivative.max(v.abs());
            }
        }
    }

    let h = g2.min_spacing().min(g3.min_spacing());
    let dt0 = cfg.cfl * h / (c_max * 3f64.sqrt());
    let steps = if cfg.t_final == 0.0 { 0 } else { (cfg.t_final / dt0 - 1e-9).ceil().max(1.0) as usize };
    let dt = if steps == 0 { dt0 } else { cfg.t_final / steps as f64 };
    let every = cfg.compare_every.max(1);

    let mut hist2: Vec<FieldState> = vec![state2d.clone()];
    let mut rec2 = |k: usize, s: &FieldState| {
        if k % every == 0 || k == steps {
            hist2.push(s.clone());
        }
        Ok(())
    };
    match &lin2 {
        Some(l) => l.evolve(state2d, dt, steps, Integrator::Leapfrog, &mut rec2)?,
        None => KerrMaxwell::new(&g2).evolve(state2d, dt, steps, Integrator::Leapfrog, &mut rec2)?,
    };

    let mut idx = 0usize;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let mut compare = |s3: &FieldState| -> Result<()> {
        let s2 = &hist2[idx];
        idx += 1;
        let pairs = [
            (plane0(&s3.e[0]), Some(&s2.e[0])),
            (plane0(&s3.e[1]), Some(&s2.e[1])),
            (plane0(&s3.e[2]), None),
            (plane0(&s3.h[0]), None),
            (plane0(&s3.h[1]), None),
            (plane0(&s3.h[2]), Some(&s2.h[0])),
        ];
        let mut err = 0.0;
        for (a, b) in &pairs {
            let d: Vec<f64> = match b {
                Some(b) => a.iter().zip(b.values()).map(|(x, y)| x - y).collect(),
                None => a.clone(),
            };
            err += plane_l2_sq(&d, &g2);
        }
        let norm: f64 = s2.components().map(|f| f.l2_squared()).sum();
        worst = worst.max(err.sqrt());
        scale = scale.max(norm.sqrt());
        Ok(())
    };
    compare(&s3)?;
    let mut rec3 = |k: usize, s: &FieldState| {
        if k % every == 0 || k == steps {
            compare(s)?;
        }
        Ok(())
    };
    match &lin3 {
        Some(l) => l.evolve(&s3, dt, steps, Integrator::Leapfrog, &mut rec3)?,
        None => KerrMaxwell::new(&g3).evolve(&s3, dt, steps, Integrator::Leapfrog, &mut rec3)?,
    };

    Ok(CylinderReport {
        dt,
        steps,
        discrepancy: worst,
        relative_discrepancy: if scale > 0.0 { worst / scale } else { worst },
        plateau_derivative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_covers_cone() {
        let c = CylinderConfig::for_horizon(0.5, 128).unwrap();
        assert!(c.validate(1.0).is_ok());
        assert!((c.cutoff(0.0) - 1.0).abs() < 1e-15);
        assert!(c.cutoff(c.length3 / 2.0) < 1e-15);
        assert!(CylinderConfig::for_horizon(0.5, 64).is_err());
    }

    #[test]
    fn zero_data_zero_discrepancy() {
        let g = TorusGrid::cube(2, 8, 2.0 * std::f64::consts::PI).unwrap();
        let cfg = CylinderConfig { t_final: 0.1, ..CylinderConfig::for_horizon(0.1, 112).unwrap() };
        let r = cylindrical_lift_and_compare(&FieldState::zeros(&g), &CoefficientSet::flat(&g), &cfg).unwrap();
        assert_eq!(r.discrepancy, 0.0);
    }
}
