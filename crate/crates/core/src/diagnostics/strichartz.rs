//! Measured Strichartz ratios
//! `||u||_{L^p_T L^q} / (||u(0)||_{H^{gamma+delta}} + ||rho(0)||_{H^{gamma-1+1/p+delta}})`
//! and the sweep over seeds, grid refinements and frequency scales.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MaxlabError, Result};
use crate::evolution::presets::{random_state, CoefficientPreset, DataKind};
use crate::evolution::{charge, Integrator, LinearMaxwell};
use crate::field::{FieldState, ScalarField};
use crate::grid::TorusGrid;
use crate::norms::{homogeneous_sobolev_norm, lq_norm, mixed_from_samples, sobolev_norm, sobolev_norm_vec};
use crate::ops::resample;

use super::{admissible, AdmissibleTriple};

#[derive(Debug, Clone, Serialize)]
pub struct StrichartzMeasurement {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub delta: f64,
    pub lhs: f64,
    pub data_norm: f64,
    pub charge_norm: f64,
    /// Homogeneous version of the charge norm (mean removed), reported only.
    pub charge_norm_homogeneous: f64,
    pub ratio: f64,
}

/// `||u(t)||_{L^q}` over the half space.
fn half_lq(s: &FieldState, q: f64) -> Result<f64> {
    let half_q = if q.is_finite() { 0.5f64.powf(1.0 / q) } else { 1.0 };
    let comps: Vec<&ScalarField> = s.components().collect();
    Ok(half_q * lq_norm(&comps, q)?)
}

/// All norms are over the half space, i.e. torus norms of the reflected fields
/// with the doubling divided out.
pub fn strichartz_ratio(history: &[FieldState], triple: &AdmissibleTriple, rho0: &ScalarField) -> Result<StrichartzMeasurement> {
    let first = history.first().ok_or_else(|| MaxlabError::InvalidInput("empty history".into()))?;
    if first.dim() != triple.dim {
        return Err(MaxlabError::InvalidInput(format!("{}D history for a {}D triple", first.dim(), triple.dim)));
    }
    if history.len() > 2 {
        let dt = history[1].time - history[0].time;
        for w in history.windows(2) {
            if ((w[1].time - w[0].time) - dt).abs() > 1e-9 * dt.abs().max(1e-300) {
                return Err(MaxlabError::InvalidInput("snapshots are not uniformly spaced".into()));
            }
        }
    }
    let mut samples = Vec::with_capacity(history.len());
    for s in history {
        first.grid().same_as(s.grid())?;
        samples.push((s.time, half_lq(s, triple.q)?));
    }
    ratio_from_samples(&samples, first, triple, rho0)
}

/// The ratio from precomputed `(t, ||u(t)||_{L^q})` samples and the initial state.
pub fn ratio_from_samples(samples: &[(f64, f64)], u0: &FieldState, triple: &AdmissibleTriple, rho0: &ScalarField) -> Result<StrichartzMeasurement> {
    let p = triple.p;
    let half2 = 0.5f64.sqrt();
    let lhs = mixed_from_samples(samples, p);
    let comps: Vec<&ScalarField> = u0.components().collect();
    let data_norm = half2 * sobolev_norm_vec(&comps, triple.gamma + triple.delta)?;
    let order = triple.gamma - 1.0 + 1.0 / p + triple.delta;
    let charge_norm = half2 * sobolev_norm(rho0, order)?;
    let charge_norm_homogeneous = half2 * homogeneous_sobolev_norm(rho0, order)?.0;
    let den = data_norm + charge_norm;
    if !(den > 0.0) {
        return Err(MaxlabError::InvalidInput("zero data: the ratio is 0/0".into()));
    }
    Ok(StrichartzMeasurement {
        p,
        q: triple.q,
        gamma: triple.gamma,
        delta: triple.delta,
        lhs,
        data_norm,
        charge_norm,
        charge_norm_homogeneous,
        ratio: lhs / den,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub dim: usize,
    pub exponents: Vec<(f64, f64)>,
    pub seeds: Vec<u64>,
    pub lambdas: Vec<f64>,
    /// Refinement levels: grids `N0 (1 + r/2)` for `r < refinements`.
    pub refinements: usize,
    pub t_final: f64,
    pub cfl: f64,
    pub length: f64,
    pub coefficients: CoefficientPreset,
    pub workers: usize,
    /// Evaluate `L^q` norms on the finest level's grid at every level, so that
    /// levels differ only by the evolution and not by the quadrature of `|u|^q`.
    pub fine_quadrature: bool,
}

impl SweepConfig {
    /// The standard suite: `(inf, 2)`, `(4, 8)` in 3D and `(8, 8)` in 2D,
    /// 20 seeds, 3 refinements, scales 4 to 64.
    pub fn standard(dim: usize) -> Self {
        let exponents = if dim == 3 { vec![(f64::INFINITY, 2.0), (4.0, 8.0)] } else { vec![(8.0, 8.0)] };
        Self {
            dim,
            exponents,
            seeds: (0..20).collect(),
            lambdas: vec![4.0, 8.0, 16.0, 32.0, 64.0],
            refinements: 3,
            t_final: 0.125,
            cfl: 0.4,
            // in 3D the lowest shell 2pi/L = 10/3 must sit inside the lambda = 4 band (2, 4)
            length: if dim == 3 { 0.6 * std::f64::consts::PI } else { 2.0 * std::f64::consts::PI },
            coefficients: CoefficientPreset::Smooth { amplitude: 0.2 },
            workers: 1,
            fine_quadrature: false,
        }
    }

    /// Base resolution for data in the band `|xi| < lambda`: Nyquist above `1.25 k_max`.
    pub fn base_points(&self, lambda: f64) -> usize {
        let kmax = lambda * self.length / (2.0 * std::f64::consts::PI);
        let n = (2.5 * kmax).ceil() as usize;
        (n + n % 2).max(8)
    }

    pub fn points(&self, lambda: f64, level: usize) -> usize {
        let n = (self.base_points(lambda) as f64 * (1.0 + level as f64 / 2.0)).round() as usize;
        n + n % 2
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub n: usize,
    pub level: usize,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub delta: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub p: f64,
    pub q: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    /// `max / min`
    pub spread: f64,
    /// Median over seeds, indexed `[lambda][level]`.
    pub level_medians: Vec<Vec<f64>>,
    /// Largest relative increase of a level median over the previous level.
    pub worst_increase: f64,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn run_member(cfg: &SweepConfig, triples: &[AdmissibleTriple], seed: u64, lambda: f64) -> Result<Vec<SweepRow>> {
    let d = cfg.dim;
    let grid_for = |n: usize| TorusGrid::new(&vec![n; d], &vec![cfg.length; d], d - 1);
    let base = grid_for(cfg.points(lambda, 0))?;
    let base_coeffs = cfg.coefficients.build(&base)?;
    // band (lambda/2, lambda)
    let data = random_state(&base, &base_coeffs, seed, lambda, lambda, DataKind::General)?;
    let quad = if cfg.fine_quadrature { Some(grid_for(cfg.points(lambda, cfg.refinements - 1))?) } else { None };
    let mut rows = Vec::new();
    for level in 0..cfg.refinements {
        let n = cfg.points(lambda, level);
        let g = grid_for(n)?;
        let coeffs = cfg.coefficients.build(&g)?;
        let e = data.e.iter().map(|f| resample(f, &g)).collect::<Result<Vec<_>>>()?;
        let h = data.h.iter().map(|f| resample(f, &g)).collect::<Result<Vec<_>>>()?;
        let u0 = FieldState::new(0.0, e, h)?;
        let solver = LinearMaxwell::new(&coeffs)?;
        let c = solver.max_wave_speed()?;
        let dt0 = cfg.cfl * g.min_spacing() / (c * (d as f64).sqrt());
        let steps = (cfg.t_final / dt0 - 1e-9).ceil().max(1.0) as usize;
        let dt = cfg.t_final / steps as f64;
        // snapshots are reduced to their L^q norms on the fly
        let lq = |s: &FieldState, q: f64| -> Result<f64> {
            match &quad {
                Some(fg) if q.is_finite() && q != 2.0 && fg.shape() != g.shape() => {
                    let e = s.e.iter().map(|f| resample(f, fg)).collect::<Result<Vec<_>>>()?;
                    let h = s.h.iter().map(|f| resample(f, fg)).collect::<Result<Vec<_>>>()?;
                    half_lq(&FieldState::new(s.time, e, h)?, q)
                }
                _ => half_lq(s, q),
            }
        };
        let mut samples: Vec<Vec<(f64, f64)>> =
            triples.iter().map(|t| lq(&u0, t.q).map(|v| vec![(0.0, v)])).collect::<Result<_>>()?;
        solver.evolve(&u0, dt, steps, Integrator::Leapfrog, |_, s| {
            for (acc, t) in samples.iter_mut().zip(triples) {
                acc.push((s.time, lq(s, t.q)?));
            }
            Ok(())
        })?;
        let rho0 = charge(&u0, &coeffs);
        for (t, smp) in triples.iter().zip(&samples) {
            let m = ratio_from_samples(smp, &u0, t, &rho0)?;
            rows.push(SweepRow { seed, n, level, lambda, p: t.p, q: t.q, gamma: t.gamma, delta: t.delta, ratio: m.ratio });
        }
    }
    Ok(rows)
}

/// Run every `(seed, lambda)` member, each over all refinement levels.
/// Rows come back in a fixed order regardless of the worker count.
pub fn strichartz_sweep(cfg: &SweepConfig) -> Result<(Vec<SweepRow>, Vec<SweepSummary>)> {
    if cfg.seeds.is_empty() || cfg.lambdas.is_empty() || cfg.refinements == 0 || cfg.exponents.is_empty() {
        return Err(MaxlabError::InvalidInput("empty sweep".into()));
    }
    let triples: Vec<AdmissibleTriple> = cfg.exponents.iter().map(|&(p, q)| admissible(p, q, cfg.dim)).collect::<Result<_>>()?;
    let members: Vec<(u64, f64)> = cfg.lambdas.iter().flat_map(|&l| cfg.seeds.iter().map(move |&s| (s, l))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| MaxlabError::InvalidInput(format!("worker pool: {e}")))?;
    let results: Vec<Result<Vec<SweepRow>>> =
        pool.install(|| members.par_iter().map(|&(s, l)| run_member(cfg, &triples, s, l)).collect());
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    let summaries = triples
        .iter()
        .map(|t| {
            let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.p == t.p && r.q == t.q).collect();
            let mut all: Vec<f64> = mine.iter().map(|r| r.ratio).collect();
            let min = all.iter().copied().fold(f64::INFINITY, f64::min);
            let max = all.iter().copied().fold(0.0, f64::max);
            let med = median(&mut all);
            let mut level_medians = Vec::new();
            let mut worst = f64::NEG_INFINITY;
            for &l in &cfg.lambdas {
                let per: Vec<f64> = (0..cfg.refinements)
                    .map(|lv| {
                        let mut v: Vec<f64> = mine.iter().filter(|r| r.lambda == l && r.level == lv).map(|r| r.ratio).collect();
                        median(&mut v)
                    })
                    .collect();
                for w in per.windows(2) {
                    worst = worst.max(w[1] / w[0] - 1.0);
                }
                level_medians.push(per);
            }
            SweepSummary { p: t.p, q: t.q, min, max, median: med, spread: max / min, level_medians, worst_increase: worst }
        })
        .collect();
    Ok((rows, summaries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_rejected() {
        let g = TorusGrid::cube(2, 8, 1.0).unwrap();
        let t = admissible(8.0, 8.0, 2).unwrap();
        let h = vec![FieldState::zeros(&g)];
        assert!(strichartz_ratio(&h, &t, &ScalarField::zeros(&g)).is_err());
    }

    #[test]
    fn base_points_resolve_band() {
        let c = SweepConfig::standard(3);
        assert_eq!(c.base_points(64.0), 48);
        assert_eq!(c.points(64.0, 2), 96);
        assert_eq!(c.base_points(4.0), 8);
    }
}
