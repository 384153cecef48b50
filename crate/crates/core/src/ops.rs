//! Spectral differential operators on the torus.
//!
//! All first derivatives share the same symbol `i xi_j` with the Nyquist
//! wavenumber zeroed, so identities such as `div curl = 0` hold to rounding.

use num_complex::Complex64;

use crate::error::{MaxlabError, Result};
use crate::field::ScalarField;
use crate::grid::TorusGrid;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Apply a Fourier multiplier `m(xi)` given as a function of the wave vector.
pub fn apply_multiplier(f: &ScalarField, m: impl Fn([f64; 3]) -> f64) -> ScalarField {
    let g = f.grid();
    let spec = f.spectrum();
    let out: Vec<Complex64> = spec.iter().enumerate().map(|(i, c)| c * m(g.xi(i))).collect();
    ScalarField::from_spectrum(g, out)
}

pub fn derivative(f: &ScalarField, axis: usize) -> ScalarField {
    let g = f.grid();
    let spec = f.spectrum();
    let out: Vec<Complex64> = spec.iter().enumerate().map(|(i, c)| c * I * g.deriv_xi(i)[axis]).collect();
    ScalarField::from_spectrum(g, out)
}

/// Sum over components of `d_j f_j` computed in one inverse transform.
pub fn divergence(v: &[ScalarField]) -> ScalarField {
    let g = v[0].grid();
    let mut acc = vec![Complex64::new(0.0, 0.0); g.len()];
    for (axis, comp) in v.iter().enumerate() {
        let spec = comp.spectrum();
        for (i, c) in spec.iter().enumerate() {
            acc[i] += c * I * g.deriv_xi(i)[axis];
        }
    }
    ScalarField::from_spectrum(g, acc)
}

pub fn gradient(f: &ScalarField) -> Vec<ScalarField> {
    (0..f.grid().dim()).map(|a| derivative(f, a)).collect()
}

/// 3D curl.
pub fn curl3(v: &[ScalarField]) -> Vec<ScalarField> {
    let g = v[0].grid();
    let s: Vec<_> = v.iter().map(|c| c.spectrum()).collect();
    let n = g.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; 3];
    for i in 0..n {
        let k = g.deriv_xi(i);
        let (a, b, c) = (s[0][i], s[1][i], s[2][i]);
        out[0][i] = I * (k[1] * c - k[2] * b);
        out[1][i] = I * (k[2] * a - k[0] * c);
        out[2][i] = I * (k[0] * b - k[1] * a);
    }
    out.into_iter().map(|o| ScalarField::from_spectrum(g, o)).collect()
}

/// Scalar 2D curl `d1 E2 - d2 E1`.
pub fn curl2(e: &[ScalarField]) -> ScalarField {
    let g = e[0].grid();
    let (s1, s2) = (e[0].spectrum(), e[1].spectrum());
    let out: Vec<Complex64> = (0..g.len())
        .map(|i| {
            let k = g.deriv_xi(i);
            I * (k[0] * s2[i] - k[1] * s1[i])
        })
        .collect();
    ScalarField::from_spectrum(g, out)
}

/// Perpendicular gradient `(d2 H, -d1 H)`.
pub fn perp_grad(h: &ScalarField) -> Vec<ScalarField> {
    vec![derivative(h, 1), derivative(h, 0).scaled(-1.0)]
}

/// Curl in either dimension: 3 components in 3D, one in 2D.
pub fn curl(v: &[ScalarField]) -> Vec<ScalarField> {
    if v[0].grid().dim() == 2 {
        vec![curl2(v)]
    } else {
        curl3(v)
    }
}

/// Low-pass by a radial weight; used for band-limited random data.
pub fn radial_filter(f: &ScalarField, w: impl Fn(f64) -> f64) -> ScalarField {
    apply_multiplier(f, |k| w((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()))
}

/// Sum of squares of all first derivatives, `||grad f||^2`, spectrally.
pub fn grad_norm_squared(f: &ScalarField) -> f64 {
    let g: &TorusGrid = f.grid();
    let spec = f.spectrum();
    let s: f64 = spec
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = g.deriv_xi(i);
            (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * c.norm_sqr()
        })
        .sum();
    s * g.volume()
}

/// Spectral interpolation onto another grid with the same lengths and dimension.
/// Modes that do not fit below the target Nyquist index are dropped, and so
/// is the source Nyquist mode.
pub fn resample(f: &ScalarField, target: &TorusGrid) -> Result<ScalarField> {
    let src = f.grid();
    if src.dim() != target.dim() || src.lengths() != target.lengths() {
        return Err(MaxlabError::GridMismatch(format!("cannot resample {src:?} onto {target:?}")));
    }
    if src == target {
        return Ok(f.clone());
    }
    let spec = f.spectrum();
    let mut out = vec![Complex64::new(0.0, 0.0); target.len()];
    let dim = src.dim();
    'modes: for (i, c) in spec.iter().enumerate() {
        let idx = src.multi_index(i);
        let mut tidx = [0usize; 3];
        for a in 0..dim {
            let (n, m) = (src.shape()[a] as i64, target.shape()[a] as i64);
            let k = if (idx[a] as i64) < n / 2 { idx[a] as i64 } else { idx[a] as i64 - n };
            if k == -n / 2 || k.abs() >= m / 2 {
                continue 'modes;
            }
            tidx[a] = k.rem_euclid(m) as usize;
        }
        out[target.flat_index(&tidx[..dim])] = *c;
    }
    Ok(ScalarField::from_spectrum(target, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_sine() {
        let g = TorusGrid::new(&[16, 12], &[2.0 * PI, 4.0 * PI], 1).unwrap();
        let f = ScalarField::from_fn(&g, |x| (3.0 * x[0]).sin() * (0.5 * x[1]).cos());
        let d = derivative(&f, 0);
        let want = ScalarField::from_fn(&g, |x| 3.0 * (3.0 * x[0]).cos() * (0.5 * x[1]).cos());
        for (a, b) in d.values().iter().zip(want.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn div_curl_vanishes() {
        let g = TorusGrid::cube(3, 8, 2.0 * PI).unwrap();
        let v: Vec<_> = (0..3)
            .map(|c| ScalarField::from_fn(&g, move |x| ((c + 1) as f64 * x[0] + x[1]).sin() + (x[2] * 2.0).cos() * x[0].cos()))
            .collect();
        let dc = divergence(&curl3(&v));
        assert!(dc.max_abs() < 1e-12);
    }

    #[test]
    fn resample_round_trip() {
        let a = TorusGrid::cube(2, 12, 2.0 * PI).unwrap();
        let b = TorusGrid::cube(2, 20, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&a, |x| (2.0 * x[0] - x[1]).sin() + 0.5);
        let up = resample(&f, &b).unwrap();
        let want = ScalarField::from_fn(&b, |x| (2.0 * x[0] - x[1]).sin() + 0.5);
        assert!(up.zip_with(&want, |x, y| x - y).max_abs() < 1e-13);
        let down = resample(&up, &a).unwrap();
        assert!(down.zip_with(&f, |x, y| x - y).max_abs() < 1e-13);
    }
}
