//! Higher-order energies `A1`, `A2` from stored histories and the Gronwall audit.
//!
//! Time derivatives come from fourth-order centered differences on the
//! snapshots, so the functionals do not depend on solver internals.

use serde::Serialize;

use crate::error::{MaxlabError, Result};
use crate::evolution::kerr::{effective_permittivity, intensity};
use crate::evolution::{curl_e, curl_h, LinearMaxwell};
use crate::field::{FieldState, ScalarField};
use crate::norms::sobolev_norm_vec;
use crate::ops::derivative;

/// Uniformly spaced snapshots.
#[derive(Debug, Clone)]
pub struct History {
    /// Spacing of the snapshots.
    pub dt: f64,
    pub states: Vec<FieldState>,
    /// Step of the leapfrog run that produced the history, if any; linear
    /// functionals then use the exactly conserved discrete form.
    pub solver_dt: Option<f64>,
}

impl History {
    pub fn new(dt: f64, states: Vec<FieldState>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(MaxlabError::InvalidInput(format!("history spacing {dt}")));
        }
        if let Some(first) = states.first() {
            for s in &states[1..] {
                first.grid().same_as(s.grid())?;
            }
        }
        Ok(Self { dt, states, solver_dt: None })
    }
}

pub enum Medium<'a> {
    Linear(&'a LinearMaxwell),
    Kerr,
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapRow {
    pub time: f64,
    pub a1: f64,
    pub a2: f64,
    /// `||d_x (E, H)||_inf + ||(E, H)||_{H^2}`
    pub driver: f64,
    /// `||d_x (E, H)||_inf`
    pub grad_sup: f64,
}

fn combo(states: &[FieldState], center: usize, weights: &[(isize, f64)], scale: f64) -> Result<FieldState> {
    let base = &states[center];
    let mut e: Vec<ScalarField> = base.e.iter().map(|f| ScalarField::zeros(f.grid())).collect();
    let mut h: Vec<ScalarField> = base.h.iter().map(|f| ScalarField::zeros(f.grid())).collect();
    for &(off, w) in weights {
        let s = &states[(center as isize + off) as usize];
        for (a, b) in e.iter_mut().zip(&s.e) {
            a.axpy(w * scale, b);
        }
        for (a, b) in h.iter_mut().zip(&s.h) {
            a.axpy(w * scale, b);
        }
    }
    FieldState::new(base.time, e, h)
}

const D1: [(isize, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
const D2: [(isize, f64); 5] = [(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)];
const D3: [(isize, f64); 6] = [(-3, 1.0), (-2, -8.0), (-1, 13.0), (1, -13.0), (2, 8.0), (3, -1.0)];

/// First, second and third time derivatives at snapshot `n`.
pub fn time_derivatives(h: &History, n: usize) -> Result<[FieldState; 3]> {
    if n < 3 || n + 3 >= h.states.len() {
        return Err(MaxlabError::InvalidInput(format!("snapshot {n} lacks three neighbours on each side")));
    }
    let dt = h.dt;
    Ok([
        combo(&h.states, n, &D1, 1.0 / (12.0 * dt))?,
        combo(&h.states, n, &D2, 1.0 / (12.0 * dt * dt))?,
        combo(&h.states, n, &D3, 1.0 / (8.0 * dt * dt * dt))?,
    ])
}

/// Half-space `(eps_1 v, v)` for the Kerr tensor of `e`.
fn kerr_form(e: &[ScalarField], v: &[ScalarField]) -> f64 {
    let t = effective_permittivity(e);
    let tv = t.apply(v);
    0.5 * tv.iter().zip(v).map(|(a, b)| a.dot(b)).sum::<f64>()
}

fn half_l2_sq(v: &[ScalarField]) -> f64 {
    0.5 * v.iter().map(|f| f.l2_squared()).sum::<f64>()
}

fn quadratic(medium: &Medium, solver_dt: Option<f64>, base: &FieldState, u: &FieldState) -> f64 {
    match medium {
        Medium::Linear(s) => match solver_dt {
            Some(dt) => s.discrete_energy(u, dt),
            None => s.energy(u),
        },
        Medium::Kerr => kerr_form(&base.e, &u.e) + half_l2_sq(&u.h),
    }
}

/// Sup of all first spatial derivatives of all components.
pub fn grad_sup(state: &FieldState) -> f64 {
    let dim = state.dim();
    state.components().flat_map(|f| (0..dim).map(move |a| derivative(f, a).max_abs())).fold(0.0, f64::max)
}

/// `A1`, `A2` and the Gronwall driver at every snapshot with three neighbours on each side.
pub fn bootstrap_functionals(history: &History, medium: &Medium) -> Result<Vec<BootstrapRow>> {
    if history.states.len() < 7 {
        return Err(MaxlabError::InvalidInput(format!(
            "third time derivatives need at least 7 snapshots, history has {}",
            history.states.len()
        )));
    }
    let mut rows = Vec::new();
    for n in 3..history.states.len() - 3 {
        let u = &history.states[n];
        let [d1, d2, d3] = time_derivatives(history, n)?;
        let q = |v: &FieldState| quadratic(medium, history.solver_dt, u, v);
        let zeroth = match medium {
            Medium::Linear(_) => q(u),
            // (eps E, E) with eps = 1 + |E|^2, plus (H, H)
            Medium::Kerr => {
                let w = intensity(&u.e).map(|x| 1.0 + x);
                let we: Vec<ScalarField> = u.e.iter().map(|f| f.zip_with(&w, |a, b| a * b)).collect();
                0.5 * we.iter().zip(&u.e).map(|(a, b)| a.dot(b)).sum::<f64>() + half_l2_sq(&u.h)
            }
        };
        let a1 = q(&d2) + q(&d1) + zeroth;
        let a2 = q(&d3) + a1;
        let gs = grad_sup(u);
        let comps: Vec<&ScalarField> = u.components().collect();
        let h2 = sobolev_norm_vec(&comps, 2.0)? / 2f64.sqrt();
        rows.push(BootstrapRow { time: u.time, a1, a2, driver: gs + h2, grad_sup: gs });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct GronwallAudit {
    /// Smallest `C` with `log A1(t) - log A1(t0) <= C int_{t0}^t ||d_x u||_inf` on the rows.
    pub constant: f64,
    /// `max |A1(t) / A1(t0) - 1|`
    pub a1_variation: f64,
}

/// Measure the Gronwall constant on the rows, integrating the sup-gradient with the trapezoid rule.
pub fn gronwall_audit(rows: &[BootstrapRow]) -> Result<GronwallAudit> {
    let first = rows.first().ok_or_else(|| MaxlabError::InvalidInput("no bootstrap rows".into()))?;
    if !(first.a1 > 0.0) {
        return Err(MaxlabError::Degenerate("A1 vanishes at the first row".into()));
    }
    let mut integral = 0.0;
    let mut constant = 0.0f64;
    let mut var = 0.0f64;
    for w in rows.windows(2) {
        integral += 0.5 * (w[0].grad_sup + w[1].grad_sup) * (w[1].time - w[0].time);
        let growth = (w[1].a1 / first.a1).ln();
        if integral > 0.0 {
            constant = constant.max(growth / integral);
        }
        var = var.max((w[1].a1 / first.a1 - 1.0).abs());
    }
    Ok(GronwallAudit { constant, a1_variation: var })
}

/// Relative residual of the differentiated linear system on the history:
/// `||d_t D' - curl H'|| + ||d_t B' + curl E'||` with `'` the first time derivative,
/// over `||d_t D'|| + ||d_t B'||`, maximized over the snapshots.
pub fn differentiated_residual(history: &History, solver: &LinearMaxwell) -> Result<f64> {
    if history.states.len() < 7 {
        return Err(MaxlabError::InvalidInput("history too short".into()));
    }
    let mut worst = 0.0f64;
    for n in 3..history.states.len() - 3 {
        let [d1, d2, _] = time_derivatives(history, n)?;
        let dd = solver.displacement(&d2.e);
        let db = solver.induction(&d2.h);
        let ch = curl_h(&d1.h);
        let ce = curl_e(&d1.e);
        let num = dd.iter().zip(&ch).map(|(a, b)| a.zip_with(b, |x, y| x - y).l2_squared()).sum::<f64>().sqrt()
            + db.iter().zip(&ce).map(|(a, b)| a.zip_with(b, |x, y| x + y).l2_squared()).sum::<f64>().sqrt();
        let den = dd.iter().chain(&db).map(|f| f.l2_squared()).sum::<f64>().sqrt();
        if den > 0.0 {
            worst = worst.max(num / den);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    #[test]
    fn stencils_on_cubic_in_time() {
        // f(t) = t^3 sampled at t = k dt; derivatives at the center are exact
        let g = TorusGrid::cube(2, 4, 1.0).unwrap();
        let dt = 0.1;
        let states: Vec<FieldState> = (0..7)
            .map(|k| {
                let t = k as f64 * dt;
                let c = ScalarField::constant(&g, t * t * t);
                FieldState::new(t, vec![c.clone(), c.clone()], vec![c]).unwrap()
            })
            .collect();
        let h = History::new(dt, states).unwrap();
        let [a, b, c] = time_derivatives(&h, 3).unwrap();
        let t: f64 = 0.3;
        assert!((a.e[0].values()[0] - 3.0 * t * t).abs() < 1e-12);
        assert!((b.e[0].values()[0] - 6.0 * t).abs() < 1e-10);
        assert!((c.e[0].values()[0] - 6.0).abs() < 1e-8);
    }

    #[test]
    fn short_history_rejected() {
        let g = TorusGrid::cube(2, 4, 1.0).unwrap();
        let h = History::new(0.1, vec![FieldState::zeros(&g); 6]).unwrap();
        assert!(bootstrap_functionals(&h, &Medium::Kerr).is_err());
    }
}
