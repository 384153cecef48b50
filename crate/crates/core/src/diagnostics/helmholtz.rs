//! `||E||_{H^{s+1}}` against `||curl E||_{H^s} + ||div E||_{H^s} + ||E||_{L2}`.

use serde::Serialize;

use crate::error::{MaxlabError, Result, TraceViolation};
use crate::field::{Parity, ScalarField};
use crate::norms::{sobolev_norm, sobolev_norm_vec};
use crate::ops::{curl, divergence, grad_norm_squared};
use crate::reflect::TRACE_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HelmholtzMode {
    Torus,
    /// Reflected half space: tangential components must be odd with zero trace.
    Half,
}

#[derive(Debug, Clone, Serialize)]
pub struct HelmholtzRatio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `| ||curl E||^2 + ||div E||^2 - ||grad E||^2 | / ||grad E||^2` (torus mode only).
    pub identity_residual: Option<f64>,
}

pub fn helmholtz_ratio(e: &[ScalarField], s: f64, mode: HelmholtzMode) -> Result<HelmholtzRatio> {
    let dim = e[0].grid().dim();
    if e.len() != dim {
        return Err(MaxlabError::InvalidInput(format!("{dim}D field needs {dim} components, got {}", e.len())));
    }
    let g = e[0].grid().clone();
    let mut weight = 1.0;
    if mode == HelmholtzMode::Half {
        let a = g.normal_axis();
        let mut bad = Vec::new();
        for (i, f) in e.iter().enumerate() {
            if i == a {
                continue;
            }
            let trace = f.plane(a, 0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if trace > TRACE_TOL * f.max_abs().max(1.0) || f.parity_defect(Parity::Odd) > 1e-10 {
                bad.push(TraceViolation { component: format!("E{}", i + 1), trace });
            }
        }
        if !bad.is_empty() {
            return Err(MaxlabError::Compatibility(bad));
        }
        // symmetric fields: every torus integral is twice the half-space one
        weight = 0.5f64.sqrt();
    }
    let comps: Vec<&ScalarField> = e.iter().collect();
    let c = curl(e);
    let cref: Vec<&ScalarField> = c.iter().collect();
    let dv = divergence(e);
    let lhs = weight * sobolev_norm_vec(&comps, s + 1.0)?;
    let rhs = weight * (sobolev_norm_vec(&cref, s)? + sobolev_norm(&dv, s)? + sobolev_norm_vec(&comps, 0.0)?);
    if rhs == 0.0 {
        return Err(MaxlabError::Degenerate("zero field".into()));
    }
    let identity_residual = if mode == HelmholtzMode::Torus {
        let grad: f64 = e.iter().map(grad_norm_squared).sum();
        let cd = c.iter().map(|f| f.l2_squared()).sum::<f64>() + dv.l2_squared();
        Some(if grad > 0.0 { (cd - grad).abs() / grad } else { cd })
    } else {
        None
    };
    Ok(HelmholtzRatio { lhs, rhs, ratio: lhs / rhs, identity_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use crate::ops::gradient;

    #[test]
    fn gradient_field_has_no_curl() {
        let g = TorusGrid::cube(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let phi = ScalarField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin());
        let e = gradient(&phi);
        let r = helmholtz_ratio(&e, 0.0, HelmholtzMode::Torus).unwrap();
        assert!(curl(&e)[0].max_abs() < 1e-12);
        assert!(r.identity_residual.unwrap() < 1e-12);
    }
}
