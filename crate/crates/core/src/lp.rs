//! Littlewood-Paley calculus on the torus.
//!
//! Bands are dyadic `lambda = 1, 2, 4, ..., top`. With the cutoff `psi`
//! (1 on `[0,1]`, 0 beyond 2) the band weights are
//! `chi_1 = psi(r)`, `chi_lambda = psi(r/lambda) - psi(2r/lambda)` and
//! `chi_top = 1 - psi(2r/top)`, so they telescope to exactly one on the lattice.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::coeffs::CoefficientSet;
use crate::error::{MaxlabError, Result};
use crate::field::ScalarField;
use crate::grid::TorusGrid;

/// Septic smoothstep cutoff: `C^3`, equal to 1 on `[0,1]` and 0 on `[2, inf)`.
pub fn psi(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let t = r - 1.0;
        let t4 = t * t * t * t;
        1.0 - t4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t)
    }
}

/// Weight of band `lambda` at radius `r` for a bank whose last band is `top`.
pub fn band_weight(lambda: f64, top: f64, r: f64) -> f64 {
    if top <= 1.0 {
        return 1.0;
    }
    if lambda <= 1.0 {
        psi(r)
    } else if lambda >= top {
        1.0 - psi(2.0 * r / top)
    } else {
        psi(r / lambda) - psi(2.0 * r / lambda)
    }
}

/// Smallest power of two `>= x` (at least 1).
pub fn dyadic_ceil(x: f64) -> f64 {
    let mut t = 1.0;
    while t < x {
        t *= 2.0;
    }
    t
}

fn check_dyadic(lambda: f64, top: f64) -> Result<()> {
    if lambda > top {
        return Err(MaxlabError::AboveNyquist { lambda, max: top });
    }
    if !(lambda >= 1.0) || lambda.log2().fract() != 0.0 {
        return Err(MaxlabError::InvalidInput(format!("band {lambda} is not a dyadic number >= 1")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct DyadicProjectorBank {
    grid: TorusGrid,
    top: f64,
}

impl DyadicProjectorBank {
    pub fn new(grid: &TorusGrid) -> Self {
        Self { grid: grid.clone(), top: dyadic_ceil(grid.max_xi_norm()) }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn top(&self) -> f64 {
        self.top
    }

    pub fn bands(&self) -> Vec<f64> {
        let mut v = vec![1.0];
        while *v.last().unwrap() < self.top {
            let next = v.last().unwrap() * 2.0;
            v.push(next);
        }
        v
    }

    pub fn weight(&self, lambda: f64, r: f64) -> f64 {
        band_weight(lambda, self.top, r)
    }

    /// `S'_lambda f`
    pub fn project(&self, f: &ScalarField, lambda: f64) -> Result<ScalarField> {
        self.grid.same_as(f.grid())?;
        check_dyadic(lambda, self.top)?;
        let g = &self.grid;
        let spec = f.spectrum();
        let out: Vec<Complex64> = spec.iter().enumerate().map(|(i, c)| c * self.weight(lambda, g.xi_norm(i))).collect();
        Ok(ScalarField::from_spectrum(g, out))
    }

    /// The enlarged projector `S~_lambda = S_{lambda/2} + S_lambda + S_{2 lambda}` (bands that exist).
    pub fn project_enlarged(&self, f: &ScalarField, lambda: f64) -> Result<ScalarField> {
        check_dyadic(lambda, self.top)?;
        let g = &self.grid;
        let spec = f.spectrum();
        let bands: Vec<f64> = [lambda / 2.0, lambda, lambda * 2.0]
            .into_iter()
            .filter(|&b| b >= 1.0 && b <= self.top)
            .collect();
        let out: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let r = g.xi_norm(i);
                c * bands.iter().map(|&b| self.weight(b, r)).sum::<f64>()
            })
            .collect();
        Ok(ScalarField::from_spectrum(g, out))
    }

    /// `sum_{mu <= cap} S'_mu f`, i.e. `psi(|xi|/cap)` (identity once `cap >= top`).
    pub fn low_pass(&self, f: &ScalarField, cap: f64) -> ScalarField {
        if cap >= self.top {
            return f.clone();
        }
        let g = &self.grid;
        let spec = f.spectrum();
        let out: Vec<Complex64> = spec.iter().enumerate().map(|(i, c)| c * psi(g.xi_norm(i) / cap)).collect();
        ScalarField::from_spectrum(g, out)
    }

    /// Coefficient truncation at level `lambda`: bands `mu <= max(1, lambda/16)`.
    pub fn truncate(&self, f: &ScalarField, lambda: f64) -> ScalarField {
        self.low_pass(f, coefficient_cap(lambda))
    }
}

/// Highest band kept when truncating coefficients at level `lambda`.
/// The lowest band is always kept so constants pass through unchanged.
pub fn coefficient_cap(lambda: f64) -> f64 {
    let c = lambda / 16.0;
    if c < 1.0 {
        1.0
    } else {
        2f64.powf(c.log2().floor())
    }
}

pub fn project_spatial(bank: &DyadicProjectorBank, f: &ScalarField, lambda: f64) -> Result<ScalarField> {
    bank.project(f, lambda)
}

/// Temporal band projection of a uniformly sampled series (periodic in time).
pub fn project_temporal(series: &[f64], dt: f64, lambda: f64) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 2 || !(dt > 0.0) {
        return Err(MaxlabError::InvalidInput("temporal projection needs >= 2 samples and dt > 0".into()));
    }
    let tau_max = std::f64::consts::PI / dt;
    let top = dyadic_ceil(tau_max);
    check_dyadic(lambda, top)?;
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = series.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let m = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let tau = 2.0 * std::f64::consts::PI * m / (n as f64 * dt);
        *c *= band_weight(lambda, top, tau.abs()) / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Ok(buf.into_iter().map(|c| c.re).collect())
}

/// Space-time band projection, weight `chi_lambda(|(tau, xi)|)`, history periodic in time.
pub fn project_spacetime(history: &[ScalarField], dt: f64, lambda: f64) -> Result<Vec<ScalarField>> {
    let nt = history.len();
    if nt < 2 || !(dt > 0.0) {
        return Err(MaxlabError::InvalidInput("space-time projection needs >= 2 snapshots and dt > 0".into()));
    }
    let g = history[0].grid().clone();
    for f in history {
        g.same_as(f.grid())?;
    }
    let tau_max = std::f64::consts::PI / dt;
    let top = dyadic_ceil((tau_max * tau_max + g.max_xi_norm().powi(2)).sqrt());
    check_dyadic(lambda, top)?;
    let specs: Vec<_> = history.iter().map(|f| f.spectrum()).collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(nt);
    let inv = planner.plan_fft_inverse(nt);
    let mut out = vec![vec![Complex64::new(0.0, 0.0); g.len()]; nt];
    let mut line = vec![Complex64::new(0.0, 0.0); nt];
    for i in 0..g.len() {
        for t in 0..nt {
            line[t] = specs[t][i];
        }
        fwd.process(&mut line);
        let r = g.xi_norm(i);
        for (k, c) in line.iter_mut().enumerate() {
            let m = if k <= nt / 2 { k as f64 } else { k as f64 - nt as f64 };
            let tau = 2.0 * std::f64::consts::PI * m / (nt as f64 * dt);
            *c *= band_weight(lambda, top, (tau * tau + r * r).sqrt()) / nt as f64;
        }
        inv.process(&mut line);
        for t in 0..nt {
            out[t][i] = line[t];
        }
    }
    Ok(out.into_iter().map(|s| ScalarField::from_spectrum(&g, s)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum TruncationScheme {
    /// Truncate `eps'` and `mu'` directly.
    A,
    /// Truncate `A`, `eps`, `mu`; rebuild `h = 1/det A` and the effective tensors.
    B,
}

pub fn truncate_coefficients(coeffs: &CoefficientSet, lambda: f64, scheme: TruncationScheme) -> Result<CoefficientSet> {
    let bank = DyadicProjectorBank::new(&coeffs.grid);
    if !(lambda >= 1.0) {
        return Err(MaxlabError::InvalidInput(format!("truncation level {lambda}")));
    }
    let cut = |f: &ScalarField| bank.truncate(f, lambda);
    let out = match scheme {
        TruncationScheme::A => {
            let mut c = coeffs.clone();
            c.epsilon = cut(&coeffs.epsilon);
            c.mu = cut(&coeffs.mu);
            c.eps_prime = coeffs.eps_prime.map_comps(cut);
            c.mu_prime = coeffs.mu_prime.map_comps(cut);
            c
        }
        TruncationScheme::B => {
            let a = coeffs.jacobian.map_comps(cut);
            let h = a.det().map(|d| 1.0 / d);
            let cometric = a.gram();
            CoefficientSet::recompose(
                coeffs.grid.clone(),
                cut(&coeffs.epsilon),
                cut(&coeffs.mu),
                cometric,
                a,
                h.clone(),
                h,
            )?
        }
    };
    let (lo, _) = out.ellipticity();
    if !(lo > 0.0) {
        return Err(MaxlabError::Ellipticity(format!("truncated coefficients lose ellipticity (min eigenvalue {lo:.3e})")));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CommutatorEstimate {
    pub lambda: f64,
    pub norm: f64,
    /// `lambda * norm`, bounded for Lipschitz coefficients.
    pub scaled: f64,
}

/// Operator norm of `[kappa_{<lambda}, S'_lambda]` on L2 by power iteration.
/// The commutator is skew-adjoint, so `-T^2` is iterated.
pub fn commutator_decay(kappa: &ScalarField, lambda: f64, iterations: usize, seed: u64) -> Result<CommutatorEstimate> {
    let g = kappa.grid();
    let bank = DyadicProjectorBank::new(g);
    check_dyadic(lambda, bank.top())?;
    let k_low = bank.truncate(kappa, lambda);
    let apply = |f: &ScalarField| -> Result<ScalarField> {
        let a = bank.project(f, lambda)?.zip_with(&k_low, |x, k| x * k);
        let b = bank.project(&f.zip_with(&k_low, |x, k| x * k), lambda)?;
        Ok(a.zip_with(&b, |x, y| x - y))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..g.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut f = ScalarField::new(g, data)?;
    let mut est = 0.0;
    for _ in 0..iterations.max(1) {
        let nf = f.l2();
        if nf == 0.0 {
            break;
        }
        f = f.scaled(1.0 / nf);
        let tf = apply(&f)?;
        est = tf.l2();
        f = apply(&tf)?.scaled(-1.0);
    }
    Ok(CommutatorEstimate { lambda, norm: est, scaled: lambda * est })
}

/// `(sum_N N^{2 rho} ||S'_N kappa||_inf^2)^{1/2}`; `rho = 1` gives the `B^1_{inf,2}` norm.
pub fn besov_norm(kappa: &ScalarField, rho: f64) -> Result<f64> {
    let bank = DyadicProjectorBank::new(kappa.grid());
    let mut acc = 0.0;
    for n in bank.bands() {
        acc += n.powf(2.0 * rho) * bank.project(kappa, n)?.max_abs().powi(2);
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn psi_is_monotone_cutoff() {
        let mut last = 1.0;
        for i in 0..=300 {
            let r = i as f64 * 0.01;
            let v = psi(r);
            assert!(v <= last + 1e-15 && (0.0..=1.0).contains(&v));
            last = v;
        }
        assert_eq!(psi(1.0), 1.0);
        assert_eq!(psi(2.0), 0.0);
    }

    #[test]
    fn bands_telescope_pointwise() {
        let top = 64.0;
        for i in 0..2000 {
            let r = i as f64 * 0.05;
            let mut s = 0.0;
            let mut l = 1.0;
            while l <= top {
                s += band_weight(l, top, r);
                l *= 2.0;
            }
            assert!((s - 1.0).abs() < 1e-14, "r={r} sum={s}");
        }
    }

    #[test]
    fn mode_at_center_passes_whole() {
        let g = TorusGrid::cube(2, 64, 2.0 * PI).unwrap();
        let bank = DyadicProjectorBank::new(&g);
        let f = ScalarField::from_fn(&g, |x| (8.0 * x[0]).cos());
        let p = bank.project(&f, 8.0).unwrap();
        for (a, b) in p.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(bank.project(&f, 32.0).unwrap().max_abs() < 1e-13);
        assert!(matches!(bank.project(&f, 2.0 * bank.top()), Err(MaxlabError::AboveNyquist { .. })));
    }

    #[test]
    fn constant_has_besov_norm_of_its_value() {
        let g = TorusGrid::cube(2, 16, 2.0 * PI).unwrap();
        let k = ScalarField::constant(&g, -2.5);
        assert!((besov_norm(&k, 1.0).unwrap() - 2.5).abs() < 1e-13);
    }

    #[test]
    fn coefficient_cap_keeps_low_band() {
        assert_eq!(coefficient_cap(1.0), 1.0);
        assert_eq!(coefficient_cap(16.0), 1.0);
        assert_eq!(coefficient_cap(64.0), 4.0);
        assert_eq!(coefficient_cap(100.0), 4.0);
    }
}
