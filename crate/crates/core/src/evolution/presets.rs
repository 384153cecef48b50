//! Media and initial data used by the runners and the tests.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::coeffs::{CoefficientSet, SymTensorField};
use crate::error::{MaxlabError, Result};
use crate::field::{FieldState, Parity, ScalarField};
use crate::grid::TorusGrid;
use crate::lp::psi;
use crate::norms::sobolev_norm_vec;
use crate::ops::{apply_multiplier, curl, gradient, perp_grad};
use crate::reflect::{geodesic_coefficients_from_fn, ParityPlan};

/// Even media on the reflected torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CoefficientPreset {
    Flat,
    /// Smooth isotropic `eps`, `mu`, Euclidean metric.
    Smooth { amplitude: f64 },
    /// Smooth `eps`, `mu` and a tangential cometric block in geodesic form.
    Geodesic { amplitude: f64 },
    /// `eps` with a Lipschitz kink across the boundary (even extension of a linear profile).
    Kink { amplitude: f64 },
}

impl CoefficientPreset {
    pub fn parse(name: &str, amplitude: f64) -> Result<Self> {
        Ok(match name {
            "flat" => Self::Flat,
            "smooth" => Self::Smooth { amplitude },
            "geodesic" => Self::Geodesic { amplitude },
            "kink" => Self::Kink { amplitude },
            other => return Err(MaxlabError::InvalidInput(format!("unknown coefficient preset '{other}'"))),
        })
    }

    pub fn build(&self, grid: &TorusGrid) -> Result<CoefficientSet> {
        let a = grid.normal_axis();
        let d = grid.dim();
        let lens = grid.lengths().to_vec();
        // tangential axis used for x-dependence
        let t = if a == 0 { 1 } else { 0 };
        let kt = 2.0 * PI / lens[t];
        let kn = 2.0 * PI / lens[a];
        match *self {
            Self::Flat => Ok(CoefficientSet::flat(grid)),
            Self::Smooth { amplitude: s } => {
                check_amp(s)?;
                let eps = ScalarField::from_fn(grid, |x| 1.0 + s * (kt * x[t]).cos() * (kn * x[a]).cos());
                let mu = ScalarField::from_fn(grid, |x| 1.0 + 0.5 * s * (kt * x[t]).sin() * (2.0 * kn * x[a]).cos());
                let mut cometric = SymTensorField::zeros(grid, d);
                for i in 0..d {
                    cometric.set(i, i, ScalarField::constant(grid, 1.0));
                }
                CoefficientSet::from_parts(eps, mu, cometric)
            }
            Self::Geodesic { amplitude: s } => {
                check_amp(s)?;
                if a != d - 1 {
                    return Err(MaxlabError::Unsupported("geodesic preset needs the normal axis last".into()));
                }
                let eps = move |x: [f64; 3]| 1.0 + s * (kt * x[0]).cos() * (kn * x[a]).cos();
                let mu = move |x: [f64; 3]| 1.0 + 0.5 * s * (kn * x[a]).cos();
                let g11 = move |x: [f64; 3]| 1.0 + 0.5 * s * (kt * x[0]).sin().powi(2) * (kn * x[a]).cos().powi(2);
                let g12 = move |x: [f64; 3]| 0.25 * s * (kt * x[0]).cos() * (kn * x[a]).cos();
                let g22 = move |x: [f64; 3]| 1.0 + 0.3 * s * (kn * x[a]).cos();
                if d == 3 {
                    geodesic_coefficients_from_fn(grid, eps, mu, &[&g11, &g12, &g22])
                } else {
                    geodesic_coefficients_from_fn(grid, eps, mu, &[&g11])
                }
            }
            Self::Kink { amplitude: s } => {
                check_amp(s)?;
                let half = lens[a] / 2.0;
                // even in x_a and periodic: a triangle wave with corners at 0 and the seam
                let eps = ScalarField::from_fn(grid, |x| 1.0 + s * x[a].abs() / half);
                let mut cometric = SymTensorField::zeros(grid, d);
                for i in 0..d {
                    cometric.set(i, i, ScalarField::constant(grid, 1.0));
                }
                CoefficientSet::from_parts(eps, ScalarField::constant(grid, 1.0), cometric)
            }
        }
    }
}

fn check_amp(s: f64) -> Result<()> {
    if !(0.0..0.9).contains(&s) {
        return Err(MaxlabError::InvalidInput(format!("coefficient amplitude {s} outside [0, 0.9)")));
    }
    Ok(())
}

/// Smooth annulus weight supported in `(lo/2, hi)`, equal to one on `[lo, hi/2]`.
/// `lo = 0` keeps the mean.
pub fn band_weight(r: f64, lo: f64, hi: f64) -> f64 {
    let upper = psi(2.0 * r / hi);
    if lo <= 0.0 {
        upper
    } else {
        upper * (1.0 - psi(2.0 * r / lo))
    }
}

/// Gaussian noise filtered to a band and symmetrized to the requested parity.
pub fn random_field(grid: &TorusGrid, rng: &mut ChaCha8Rng, lo: f64, hi: f64, parity: Parity) -> ScalarField {
    let noise: Vec<f64> = (0..grid.len()).map(|_| StandardNormal.sample(rng)).collect();
    let f = ScalarField::new(grid, noise).expect("length matches");
    let f = apply_multiplier(&f, |k| band_weight((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt(), lo, hi));
    symmetrize(&f, parity)
}

/// `(f + s Rf) / 2`; odd fields get exact zeros on the fixed planes.
pub fn symmetrize(f: &ScalarField, parity: Parity) -> ScalarField {
    let s = parity.sign();
    let r = f.reflected();
    let g = f.grid();
    let a = g.normal_axis();
    let n = g.shape()[a];
    let mut out = f.zip_with(&r, |x, y| 0.5 * (x + s * y));
    if parity == Parity::Odd {
        let vals = out.values_mut();
        for (p, v) in vals.iter_mut().enumerate() {
            let j = g.multi_index(p)[a];
            if j == 0 || j == n / 2 {
                *v = 0.0;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DataKind {
    /// Independent random `E` and `H`; generically charged.
    General,
    /// `D' = curl A` (3D) or `perp grad psi` (2D), so the charge vanishes.
    DivergenceFree,
    /// Divergence-free part plus `grad phi` with odd `phi`: charge `lap phi`.
    Charged,
}

/// Random band-limited data respecting the parity plan.
pub fn random_state(grid: &TorusGrid, coeffs: &CoefficientSet, seed: u64, lo: f64, hi: f64, kind: DataKind) -> Result<FieldState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = ParityPlan::for_grid(grid);
    let h: Vec<ScalarField> = plan.h.iter().map(|&p| random_field(grid, &mut rng, lo, hi, p)).collect();
    let e = match kind {
        DataKind::General => plan.e.iter().map(|&p| random_field(grid, &mut rng, lo, hi, p)).collect(),
        DataKind::DivergenceFree | DataKind::Charged => {
            let mut d = divergence_free(grid, &mut rng, lo, hi, &plan);
            if kind == DataKind::Charged {
                let phi = random_field(grid, &mut rng, lo, hi, Parity::Odd);
                for (di, gi) in d.iter_mut().zip(gradient(&phi)) {
                    di.axpy(1.0, &gi);
                }
            }
            let inv = coeffs.eps_prime.inverse()?;
            inv.apply(&d)
        }
    };
    let e = e.into_iter().zip(&plan.e).map(|(f, &p)| symmetrize(&f, p)).collect();
    FieldState::new(0.0, e, h)
}

fn divergence_free(grid: &TorusGrid, rng: &mut ChaCha8Rng, lo: f64, hi: f64, plan: &ParityPlan) -> Vec<ScalarField> {
    // potentials carry the magnetic parities, and curl maps those to electric ones
    let pot: Vec<ScalarField> = plan.h.iter().map(|&p| random_field(grid, rng, lo, hi, p)).collect();
    if grid.dim() == 2 {
        perp_grad(&pot[0])
    } else {
        curl(&pot)
    }
}

/// Scale `state` so that `||(E, H)||_{H^s} = target`.
pub fn normalize(state: &FieldState, s: f64, target: f64) -> Result<FieldState> {
    let comps: Vec<&ScalarField> = state.components().collect();
    let n = sobolev_norm_vec(&comps, s)?;
    if n == 0.0 {
        return Err(MaxlabError::Degenerate("cannot normalize a zero state".into()));
    }
    let f = target / n;
    FieldState::new(state.time, state.e.iter().map(|c| c.scaled(f)).collect(), state.h.iter().map(|c| c.scaled(f)).collect())
}

/// Exact standing wave of the flat system with a perfectly conducting plane at `x_d = 0`.
///
/// 2D (normal axis 1): `H = cos(k1 x1) cos(k2 x2) cos(w t)`,
/// `E = (-k2 cos(k1 x1) sin(k2 x2), k1 sin(k1 x1) cos(k2 x2)) sin(w t) / w`.
///
/// 3D (normal axis 2), from the potential `a = (0, sin(k3 x3) cos(k1 x1), 0)`:
/// `H = curl a cos(w t)`, `E = w a sin(w t)`.
///
/// `modes` are integer wave numbers along the tangential axis and the normal axis.
pub fn standing_wave(grid: &TorusGrid, modes: [i64; 2], t: f64) -> Result<FieldState> {
    let d = grid.dim();
    if grid.normal_axis() != d - 1 {
        return Err(MaxlabError::Unsupported("standing wave assumes the normal axis last".into()));
    }
    let k1 = 2.0 * PI * modes[0] as f64 / grid.lengths()[0];
    let kn = 2.0 * PI * modes[1] as f64 / grid.lengths()[d - 1];
    let w = (k1 * k1 + kn * kn).sqrt();
    if w == 0.0 {
        return Err(MaxlabError::Degenerate("standing wave needs a nonzero mode".into()));
    }
    let (c, s) = ((w * t).cos(), (w * t).sin());
    if d == 2 {
        let h = ScalarField::from_fn(grid, |x| (k1 * x[0]).cos() * (kn * x[1]).cos() * c);
        let e1 = ScalarField::from_fn(grid, |x| -kn * (k1 * x[0]).cos() * (kn * x[1]).sin() * s / w);
        let e2 = ScalarField::from_fn(grid, |x| k1 * (k1 * x[0]).sin() * (kn * x[1]).cos() * s / w);
        FieldState::new(t, vec![symmetrize(&e1, Parity::Odd), e2], vec![h])
    } else {
        let z = ScalarField::zeros(grid);
        let e2 = ScalarField::from_fn(grid, |x| w * (kn * x[2]).sin() * (k1 * x[0]).cos() * s);
        let h1 = ScalarField::from_fn(grid, |x| -kn * (kn * x[2]).cos() * (k1 * x[0]).cos() * c);
        let h3 = ScalarField::from_fn(grid, |x| -k1 * (kn * x[2]).sin() * (k1 * x[0]).sin() * c);
        FieldState::new(t, vec![z.clone(), symmetrize(&e2, Parity::Odd), z.clone()], vec![h1, z, symmetrize(&h3, Parity::Odd)])
    }
}

/// Gaussian magnetic packet `H = exp(-|x - x0|^2 / w^2) cos(k x1)` mirrored evenly; `E = 0`.
pub fn packet_2d(grid: &TorusGrid, center: [f64; 2], width: f64, k: f64) -> Result<FieldState> {
    if grid.dim() != 2 {
        return Err(MaxlabError::InvalidInput("packet preset is two dimensional".into()));
    }
    let h = ScalarField::from_fn(grid, |x| {
        let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
        (-r2 / (width * width)).exp() * (k * x[0]).cos()
    });
    let h = symmetrize(&h, Parity::Even);
    FieldState::new(0.0, vec![ScalarField::zeros(grid), ScalarField::zeros(grid)], vec![h])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::charge;

    #[test]
    fn random_state_respects_plan() {
        let g = TorusGrid::cube(3, 12, 2.0 * PI).unwrap();
        let c = CoefficientPreset::Smooth { amplitude: 0.3 }.build(&g).unwrap();
        let s = random_state(&g, &c, 7, 0.0, 4.0, DataKind::General).unwrap();
        assert!(ParityPlan::for_grid(&g).state_defect(&s) < 1e-14);
    }

    #[test]
    fn divergence_free_has_no_charge() {
        let g = TorusGrid::cube(2, 32, 2.0 * PI).unwrap();
        let c = CoefficientPreset::Geodesic { amplitude: 0.3 }.build(&g).unwrap();
        let s = random_state(&g, &c, 1, 0.0, 6.0, DataKind::DivergenceFree).unwrap();
        let rho = charge(&s, &c);
        assert!(rho.max_abs() < 1e-12 * s.max_abs().max(1.0), "{}", rho.max_abs());
    }

    #[test]
    fn standing_wave_parities() {
        for dim in [2, 3] {
            let g = TorusGrid::cube(dim, 8, 2.0 * PI).unwrap();
            let s = standing_wave(&g, [1, 2], 0.3).unwrap();
            assert!(ParityPlan::for_grid(&g).state_defect(&s) < 1e-14);
        }
    }
}
