//! Sharp frequency envelopes and boundary-preserving mollification.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{MaxlabError, Result};
use crate::field::{FieldState, ScalarField};
use crate::lp::DyadicProjectorBank;
use crate::norms::sobolev_norm;

#[derive(Debug, Clone, Serialize)]
pub struct FrequencyEnvelope {
    pub s: f64,
    pub delta: f64,
    pub bands: Vec<f64>,
    /// `c~_N = ||S'_N u||_{H^s}`
    pub c_tilde: Vec<f64>,
    /// `c_N = sup_M min(N/M, M/N)^delta c~_M`
    pub c: Vec<f64>,
}

/// `C_delta = sum_k 2^{-2 delta |k|}`
pub fn l2_constant(delta: f64) -> f64 {
    let r = 2f64.powf(-2.0 * delta);
    (1.0 + r) / (1.0 - r)
}

pub fn sharp_envelope(u: &[&ScalarField], s: f64, delta: f64, bank: &DyadicProjectorBank) -> Result<FrequencyEnvelope> {
    if !(delta > 0.0) {
        return Err(MaxlabError::InvalidInput(format!("envelope needs delta > 0, got {delta}")));
    }
    let bands = bank.bands();
    let mut c_tilde = Vec::with_capacity(bands.len());
    for &n in &bands {
        let mut acc = 0.0;
        for f in u {
            acc += sobolev_norm(&bank.project(f, n)?, s)?.powi(2);
        }
        c_tilde.push(acc.sqrt());
    }
    let c = bands
        .iter()
        .map(|&n| {
            bands
                .iter()
                .zip(&c_tilde)
                .map(|(&m, &ct)| (n / m).min(m / n).powf(delta) * ct)
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(FrequencyEnvelope { s, delta, bands, c_tilde, c })
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeAxioms {
    /// `max_N (c~_N - c_N)`, should be `<= 0`.
    pub energy_excess: f64,
    /// `max_{J,K} c_K / c_J / max(J/K, K/J)^delta`, should be `<= 1`.
    pub slowly_varying: f64,
    /// `sum c_N^2 / (C_delta sum c~_N^2)`, should be `<= 1`.
    pub l2_ratio: f64,
}

impl FrequencyEnvelope {
    pub fn axioms(&self) -> EnvelopeAxioms {
        let energy_excess = self.c_tilde.iter().zip(&self.c).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
        let mut slowly_varying = 0.0f64;
        for (j, &bj) in self.bands.iter().enumerate() {
            for (k, &bk) in self.bands.iter().enumerate() {
                if self.c[j] > 0.0 {
                    let allowed = (bj / bk).max(bk / bj).powf(self.delta);
                    slowly_varying = slowly_varying.max(self.c[k] / self.c[j] / allowed);
                }
            }
        }
        let num: f64 = self.c.iter().map(|v| v * v).sum();
        let den: f64 = self.c_tilde.iter().map(|v| v * v).sum::<f64>() * l2_constant(self.delta);
        let l2_ratio = if den > 0.0 { num / den } else { 0.0 };
        EnvelopeAxioms { energy_excess, slowly_varying, l2_ratio }
    }

    pub fn l2_distance(&self, other: &FrequencyEnvelope) -> f64 {
        self.c.iter().zip(&other.c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

/// Unnormalized bump `exp(-1/(1-y^2))` on `(-1, 1)`.
fn bump(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y * y)).exp()
    }
}

/// Fourier transform of the unit-mass bump at the given frequencies (trapezoid rule;
/// the integrand is flat to all orders at the endpoints).
pub fn bump_transform(omegas: &[f64]) -> Vec<f64> {
    const M: usize = 4000;
    let h = 2.0 / M as f64;
    let ys: Vec<f64> = (0..=M).map(|i| -1.0 + i as f64 * h).collect();
    let w: Vec<f64> = ys.iter().map(|&y| bump(y)).collect();
    let mass: f64 = w.iter().sum::<f64>() * h;
    omegas
        .iter()
        .map(|&om| ys.iter().zip(&w).map(|(&y, &b)| b * (om * y).cos()).sum::<f64>() * h / mass)
        .collect()
}

/// Convolve every component with the tensor mollifier `n^d prod psi(n y_i)`.
/// Requires the E components to vanish within `2/n` of the boundary plane.
pub fn mollify_preserving_bc(state: &FieldState, n: f64) -> Result<FieldState> {
    if !(n > 0.0) {
        return Err(MaxlabError::InvalidInput(format!("mollifier scale {n}")));
    }
    let g = state.grid().clone();
    let a = g.normal_axis();
    let margin = 2.0 / n;
    for (c, name) in state.e.iter().zip(["E1", "E2", "E3"]) {
        let scale = c.max_abs();
        let near = (0..g.len())
            .filter(|&p| g.point(p)[a].abs() <= margin)
            .map(|p| c.values()[p].abs())
            .fold(0.0, f64::max);
        if near > 1e-12 * scale.max(f64::MIN_POSITIVE) && near > 0.0 {
            return Err(MaxlabError::SupportMargin(format!(
                "{name} reaches {near:.3e} within distance {margin:.4} of the boundary"
            )));
        }
    }
    let tables: Vec<Vec<f64>> = (0..g.dim())
        .map(|ax| bump_transform(&g.wavenumbers(ax).iter().map(|k| k / n).collect::<Vec<_>>()))
        .collect();
    let smooth = |f: &ScalarField| {
        let spec = f.spectrum();
        let out: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let idx = g.multi_index(i);
                c * (0..g.dim()).map(|ax| tables[ax][idx[ax]]).product::<f64>()
            })
            .collect();
        ScalarField::from_spectrum(&g, out)
    };
    FieldState::new(state.time, state.e.iter().map(smooth).collect(), state.h.iter().map(smooth).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_transform_at_zero_is_mass() {
        let v = bump_transform(&[0.0, 1.0, -1.0]);
        assert!((v[0] - 1.0).abs() < 1e-13);
        assert!((v[1] - v[2]).abs() < 1e-15);
        assert!(v[1] < 1.0 && v[1] > 0.0);
    }

    #[test]
    fn c_delta_closed_form() {
        let d = 0.25;
        let direct: f64 = (-200i32..=200).map(|k| 2f64.powf(-2.0 * d * k.abs() as f64)).sum();
        assert!((direct - l2_constant(d)).abs() < 1e-12);
    }
}
