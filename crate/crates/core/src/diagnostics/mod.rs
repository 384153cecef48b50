//! Energies, bootstrap functionals, Helmholtz ratios and Strichartz measurements.

pub mod bootstrap;
pub mod helmholtz;
pub mod strichartz;

use serde::Serialize;

use crate::coeffs::CoefficientSet;
use crate::error::{MaxlabError, Result};
use crate::field::FieldState;

pub use bootstrap::{bootstrap_functionals, differentiated_residual, gronwall_audit, BootstrapRow, GronwallAudit, History, Medium};
pub use helmholtz::{helmholtz_ratio, HelmholtzMode, HelmholtzRatio};
pub use strichartz::{ratio_from_samples, strichartz_ratio, strichartz_sweep, StrichartzMeasurement, SweepConfig, SweepRow, SweepSummary};

/// Exponents `(p, q)`, derivative count `gamma` and loss `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibleTriple {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    /// Loss used in measurements; starts at `delta_max / 2`.
    pub delta: f64,
    /// Open upper bound for `delta`.
    pub delta_max: f64,
    pub dim: usize,
}

impl AdmissibleTriple {
    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < self.delta_max) {
            return Err(MaxlabError::Inadmissible(format!("need 0 < delta < {}, got {delta}", self.delta_max)));
        }
        self.delta = delta;
        Ok(self)
    }
}

/// Check the wave-admissibility region and compute `gamma`.
///
/// 3D: `3/p + 2/q <= 1`, `gamma = 3(1/2 - 1/q) - 1/p`, `0 < delta < 3/q`.
/// 2D: `3/p + 1/q <= 1/2`, `gamma = 2(1/2 - 1/q) - 1/p`, `0 < delta < 1/2`.
/// `p = f64::INFINITY` is allowed, `q` must be finite.
pub fn admissible(p: f64, q: f64, dim: usize) -> Result<AdmissibleTriple> {
    if q.is_infinite() {
        return Err(MaxlabError::Inadmissible("q < inf is required".into()));
    }
    if !(p >= 2.0) || !(q >= 2.0) || q.is_nan() {
        return Err(MaxlabError::Inadmissible(format!("p, q >= 2 required, got ({p}, {q})")));
    }
    let (ip, iq) = (1.0 / p, 1.0 / q);
    // exact comparisons fail on sums like 3/8 + 1/8 at rounding level
    let tol = 1e-12;
    let (gamma, delta_max) = match dim {
        3 => {
            if 3.0 * ip + 2.0 * iq > 1.0 + tol {
                return Err(MaxlabError::Inadmissible(format!("3/p + 2/q = {} > 1", 3.0 * ip + 2.0 * iq)));
            }
            (3.0 * (0.5 - iq) - ip, 3.0 * iq)
        }
        2 => {
            if 3.0 * ip + iq > 0.5 + tol {
                return Err(MaxlabError::Inadmissible(format!("3/p + 1/q = {} > 1/2", 3.0 * ip + iq)));
            }
            (2.0 * (0.5 - iq) - ip, 0.5)
        }
        d => return Err(MaxlabError::InvalidInput(format!("dimension {d}"))),
    };
    Ok(AdmissibleTriple { p, q, gamma, delta: 0.5 * delta_max, delta_max, dim })
}

/// `M = (int D'.E + B'.H) / 2` over the torus, i.e. the half-space integral.
pub fn energy_m(state: &FieldState, coeffs: &CoefficientSet) -> Result<f64> {
    coeffs.grid.same_as(state.grid())?;
    let d = coeffs.eps_prime.apply(&state.e);
    let b = coeffs.mu_prime.apply(&state.h);
    let s: f64 = d.iter().zip(&state.e).map(|(x, y)| x.dot(y)).sum::<f64>()
        + b.iter().zip(&state.h).map(|(x, y)| x.dot(y)).sum::<f64>();
    Ok(0.5 * s)
}

/// Kerr energy `M = (int D.E + H.H) / 2` with `D = (1 + |E|^2) E`.
pub fn energy_m_kerr(state: &FieldState) -> f64 {
    crate::evolution::KerrMaxwell::new(state.grid()).energy(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_examples() {
        let a = admissible(f64::INFINITY, 2.0, 3).unwrap();
        assert_eq!(a.gamma, 0.0);
        assert_eq!(admissible(4.0, 8.0, 3).unwrap().gamma, 7.0 / 8.0);
        assert_eq!(admissible(8.0, 8.0, 2).unwrap().gamma, 5.0 / 8.0);
        assert!(matches!(admissible(4.0, f64::INFINITY, 3), Err(MaxlabError::Inadmissible(_))));
        assert!(admissible(2.0, 2.0, 3).is_err());
        assert!(admissible(4.0, 8.0, 2).is_err());
    }
}
