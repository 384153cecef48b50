//! Sobolev, Lebesgue and mixed space-time norms plus the per-run report.

use serde::Serialize;

use crate::error::{MaxlabError, Result};
use crate::field::{FieldState, ScalarField};
use crate::grid::TorusGrid;

/// `||f||_{H^s}` with weight `<xi>^{2s}`. For `s = 0` this equals the L2 quadrature.
pub fn sobolev_norm(f: &ScalarField, s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(MaxlabError::InvalidInput(format!("Sobolev order {s}")));
    }
    let g = f.grid();
    let spec = f.spectrum();
    let sum: f64 = spec
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k2 = g.xi_norm(i).powi(2);
            (1.0 + k2).powf(s) * c.norm_sqr()
        })
        .sum();
    let out = (sum * g.volume()).sqrt();
    if out.is_finite() {
        Ok(out)
    } else {
        Err(MaxlabError::NonFinite("sobolev norm".into()))
    }
}

/// Sobolev norm of a vector field (root sum of squares of the components).
pub fn sobolev_norm_vec(v: &[&ScalarField], s: f64) -> Result<f64> {
    let mut acc = 0.0;
    for f in v {
        acc += sobolev_norm(f, s)?.powi(2);
    }
    Ok(acc.sqrt())
}

/// Homogeneous `|| |D|^s f ||_{L2}` with the zero mode removed.
/// Returns the norm and the magnitude of the dropped mean separately.
pub fn homogeneous_sobolev_norm(f: &ScalarField, s: f64) -> Result<(f64, f64)> {
    let g = f.grid();
    let spec = f.spectrum();
    let mut sum = 0.0;
    for (i, c) in spec.iter().enumerate().skip(1) {
        sum += g.xi_norm(i).powf(2.0 * s) * c.norm_sqr();
    }
    let mean = spec[0].norm() * g.volume().sqrt();
    let out = (sum * g.volume()).sqrt();
    if out.is_finite() {
        Ok((out, mean))
    } else {
        Err(MaxlabError::NonFinite("homogeneous sobolev norm".into()))
    }
}

/// `L^q` norm of the pointwise Euclidean magnitude of a vector field; `q = inf` allowed.
pub fn lq_norm(v: &[&ScalarField], q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(MaxlabError::InvalidInput(format!("L^q exponent {q} below 1")));
    }
    let g = v[0].grid();
    let n = g.len();
    let mut mag2 = vec![0.0; n];
    for f in v {
        g.same_as(f.grid())?;
        for (m, x) in mag2.iter_mut().zip(f.values()) {
            *m += x * x;
        }
    }
    let out = if q.is_infinite() {
        mag2.iter().fold(0.0f64, |m, &x| m.max(x)).sqrt()
    } else {
        let s: f64 = mag2.iter().map(|&x| x.powf(q / 2.0)).sum();
        (s * g.cell_volume()).powf(1.0 / q)
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(MaxlabError::NonFinite("lq norm".into()))
    }
}

/// Running `L^p_t L^q_x` norm over uniformly spaced snapshots (trapezoid rule in time).
#[derive(Debug, Clone, Serialize)]
pub struct MixedNorm {
    pub p: f64,
    pub q: f64,
    pub samples: Vec<(f64, f64)>,
}

impl MixedNorm {
    pub fn new(p: f64, q: f64) -> Self {
        Self { p, q, samples: Vec::new() }
    }

    pub fn value(&self) -> f64 {
        mixed_from_samples(&self.samples, self.p)
    }
}

pub fn mixed_from_samples(samples: &[(f64, f64)], p: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    if p.is_infinite() {
        return samples.iter().fold(0.0f64, |m, s| m.max(s.1));
    }
    if samples.len() == 1 {
        return 0.0;
    }
    let mut acc = 0.0;
    for w in samples.windows(2) {
        let dt = w[1].0 - w[0].0;
        acc += 0.5 * dt * (w[0].1.powf(p) + w[1].1.powf(p));
    }
    acc.powf(1.0 / p)
}

#[derive(Debug, Clone, Serialize)]
pub struct NormRow {
    pub time: f64,
    pub energy: f64,
    pub charge: f64,
    pub sobolev: Vec<f64>,
}

/// Per-run time series of norms.
#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub shape: Vec<usize>,
    pub sobolev_orders: Vec<f64>,
    pub rows: Vec<NormRow>,
    pub mixed: Option<MixedNorm>,
}

impl NormReport {
    pub fn new(grid: &TorusGrid, sobolev_orders: Vec<f64>) -> Self {
        Self { shape: grid.shape().to_vec(), sobolev_orders, rows: Vec::new(), mixed: None }
    }

    /// Append energy, charge and the configured Sobolev norms of `state`.
    pub fn record(&mut self, state: &FieldState, energy: f64, charge: f64) -> Result<()> {
        self.check_grid(state.grid())?;
        let comps: Vec<&ScalarField> = state.components().collect();
        let mut sob = Vec::with_capacity(self.sobolev_orders.len());
        for &s in &self.sobolev_orders {
            sob.push(sobolev_norm_vec(&comps, s)?);
        }
        self.rows.push(NormRow { time: state.time, energy, charge, sobolev: sob });
        Ok(())
    }

    fn check_grid(&self, g: &TorusGrid) -> Result<()> {
        if g.shape() != self.shape.as_slice() {
            return Err(MaxlabError::GridMismatch(format!(
                "report built for {:?}, snapshot on {:?}",
                self.shape,
                g.shape()
            )));
        }
        Ok(())
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["time".to_string(), "energy".into(), "charge".into()];
        header.extend(self.sobolev_orders.iter().map(|s| format!("h{s}")));
        if self.mixed.is_some() {
            header.push("mixed_lq".into());
        }
        wr.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![fmt(row.time), fmt(row.energy), fmt(row.charge)];
            rec.extend(row.sobolev.iter().map(|&v| fmt(v)));
            if let Some(m) = &self.mixed {
                let upto = m.samples.iter().take_while(|s| s.0 <= row.time + 1e-12).count();
                rec.push(fmt(mixed_from_samples(&m.samples[..upto], m.p)));
            }
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub(crate) fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// Push `||snapshot||_{L^q}` into the report's mixed-norm accumulator.
pub fn mixed_norm_accumulate(mut report: NormReport, snapshot: &FieldState, p: f64, q: f64) -> Result<NormReport> {
    report.check_grid(snapshot.grid())?;
    if !(p >= 1.0) || !(q >= 1.0) {
        return Err(MaxlabError::InvalidInput(format!("mixed norm exponents p={p}, q={q}")));
    }
    let m = report.mixed.get_or_insert_with(|| MixedNorm::new(p, q));
    if m.p != p || m.q != q {
        return Err(MaxlabError::InvalidInput(format!(
            "accumulator holds (p,q)=({},{}), asked for ({p},{q})",
            m.p, m.q
        )));
    }
    if let Some(&(t_last, _)) = m.samples.last() {
        if snapshot.time <= t_last {
            return Err(MaxlabError::InvalidInput("snapshots must arrive in increasing time".into()));
        }
    }
    let comps: Vec<&ScalarField> = snapshot.components().collect();
    let a = lq_norm(&comps, q)?;
    m.samples.push((snapshot.time, a));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sobolev_zero_is_l2() {
        let g = TorusGrid::cube(2, 16, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&g, |x| (x[0]).sin() + 0.3 * (2.0 * x[1]).cos() + 0.1);
        let a = sobolev_norm(&f, 0.0).unwrap();
        assert!((a - f.l2()).abs() < 1e-12 * a);
    }

    #[test]
    fn single_mode_sobolev() {
        // |sin(3x)|^2 integrates to 2 pi^2 on the 2-torus of side 2 pi
        let g = TorusGrid::cube(2, 16, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&g, |x| (3.0 * x[0]).sin());
        let got = sobolev_norm(&f, 1.5).unwrap();
        let want = (10.0f64.powf(1.5) * 2.0 * PI * PI).sqrt();
        assert!((got - want).abs() < 1e-11 * want);
    }

    #[test]
    fn lq_of_constant() {
        let g = TorusGrid::cube(2, 8, 2.0).unwrap();
        let f = ScalarField::constant(&g, 3.0);
        let got = lq_norm(&[&f], 4.0).unwrap();
        assert!((got - 3.0 * 4.0f64.powf(0.25)).abs() < 1e-12);
        assert_eq!(lq_norm(&[&f], f64::INFINITY).unwrap(), 3.0);
    }

    #[test]
    fn mixed_norm_of_constant_series() {
        let samples: Vec<(f64, f64)> = (0..11).map(|i| (i as f64 * 0.1, 2.0)).collect();
        assert!((mixed_from_samples(&samples, 2.0) - 2.0).abs() < 1e-12);
        assert_eq!(mixed_from_samples(&samples, f64::INFINITY), 2.0);
    }
}
