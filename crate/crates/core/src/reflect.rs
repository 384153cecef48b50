//! Even/odd reflection across the boundary plane and compatibility checks.

use crate::coeffs::{CoefficientSet, SymTensorField};
use crate::error::{MaxlabError, Result, TraceViolation};
use crate::field::{FieldState, Parity, ScalarField};
use crate::grid::TorusGrid;
use crate::ops::derivative;

/// Absolute trace tolerance, scaled by `max(1, ||f||_inf)`.
pub const TRACE_TOL: f64 = 1e-10;

/// Samples on the closed half torus `0 <= x_d <= L_d/2` along the normal axis.
#[derive(Debug, Clone)]
pub struct HalfField {
    grid: TorusGrid,
    data: Vec<f64>,
}

impl HalfField {
    /// Number of normal-axis samples kept: `n/2 + 1`.
    pub fn normal_len(grid: &TorusGrid) -> usize {
        grid.shape()[grid.normal_axis()] / 2 + 1
    }

    fn shape(grid: &TorusGrid) -> Vec<usize> {
        let mut s = grid.shape().to_vec();
        s[grid.normal_axis()] = Self::normal_len(grid);
        s
    }

    pub fn len_for(grid: &TorusGrid) -> usize {
        Self::shape(grid).iter().product()
    }

    pub fn new(grid: &TorusGrid, data: Vec<f64>) -> Result<Self> {
        if data.len() != Self::len_for(grid) {
            return Err(MaxlabError::GridMismatch(format!(
                "half field needs {} samples, got {}",
                Self::len_for(grid),
                data.len()
            )));
        }
        Ok(Self { grid: grid.clone(), data })
    }

    /// Sample `f` at half-space points; tangential axes use the centered chart,
    /// the normal coordinate runs over `[0, L_d/2]`.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let shape = Self::shape(grid);
        let a = grid.normal_axis();
        let mut data = Vec::with_capacity(shape.iter().product());
        let mut idx = [0usize; 3];
        let total: usize = shape.iter().product();
        for _ in 0..total {
            let mut x = [0.0; 3];
            for ax in 0..grid.dim() {
                x[ax] = if ax == a { grid.coord(ax, idx[ax]) } else { grid.centered_coord(ax, idx[ax]) };
            }
            data.push(f(x));
            for ax in (0..grid.dim()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Self { grid: grid.clone(), data }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.data
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Flat index in the half layout for a full-grid multi-index with `j <= n/2`.
    fn half_flat(&self, idx: &[usize; 3]) -> usize {
        let shape = Self::shape(&self.grid);
        let mut f = 0;
        for ax in 0..self.grid.dim() {
            f = f * shape[ax] + idx[ax];
        }
        f
    }

    /// Largest absolute sample on the boundary plane `x_d = 0`.
    pub fn boundary_trace(&self) -> f64 {
        let a = self.grid.normal_axis();
        let shape = Self::shape(&self.grid);
        let mut worst = 0.0f64;
        for (k, v) in self.data.iter().enumerate() {
            let mut rem = k;
            let mut j = 0;
            for ax in (0..self.grid.dim()).rev() {
                if ax == a {
                    j = rem % shape[ax];
                }
                rem /= shape[ax];
            }
            if j == 0 {
                worst = worst.max(v.abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Reflection parities of every component for one system.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityPlan {
    pub e: Vec<Parity>,
    pub h: Vec<Parity>,
    pub j: Vec<Parity>,
    pub rho: Parity,
}

impl ParityPlan {
    /// Tangential E odd, normal E even; tangential H even, normal H odd (3D).
    /// In 2D the scalar H is even.
    pub fn for_grid(grid: &TorusGrid) -> Self {
        let a = grid.normal_axis();
        let e: Vec<Parity> = (0..grid.dim()).map(|i| if i == a { Parity::Even } else { Parity::Odd }).collect();
        let h = if grid.dim() == 2 {
            vec![Parity::Even]
        } else {
            (0..3).map(|i| if i == a { Parity::Odd } else { Parity::Even }).collect()
        };
        Self { j: e.clone(), e, h, rho: Parity::Odd }
    }

    pub fn coefficient() -> Parity {
        Parity::Even
    }

    /// Largest relative parity defect over all components of a state.
    pub fn state_defect(&self, state: &FieldState) -> f64 {
        let pe = state.e.iter().zip(&self.e).map(|(f, &p)| f.parity_defect(p));
        let ph = state.h.iter().zip(&self.h).map(|(f, &p)| f.parity_defect(p));
        pe.chain(ph).fold(0.0, f64::max)
    }
}

/// Extend half-space samples to the torus with the given parity.
///
/// Odd extensions store exact zeros on the boundary plane and on the seam
/// `x_d = L_d/2`; the seam is a periodization artefact, not a boundary.
pub fn extend_half_to_torus(half: &HalfField, parity: Parity) -> Result<ScalarField> {
    let grid = half.grid();
    if parity == Parity::Odd {
        let trace = half.boundary_trace();
        if trace > TRACE_TOL * half.max_abs().max(1.0) {
            return Err(MaxlabError::Compatibility(vec![TraceViolation { component: "field".into(), trace }]));
        }
    }
    let a = grid.normal_axis();
    let n = grid.shape()[a];
    let s = parity.sign();
    let mut out = vec![0.0; grid.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let mut idx = grid.multi_index(flat);
        let j = idx[a];
        let (src, sign) = if j <= n / 2 { (j, 1.0) } else { (n - j, s) };
        if parity == Parity::Odd && (src == 0 || src == n / 2) {
            continue;
        }
        idx[a] = src;
        *o = sign * half.values()[half.half_flat(&idx)];
    }
    ScalarField::new(grid, out)
}

/// Restrict a torus field to the closed half torus.
pub fn restrict(field: &ScalarField) -> HalfField {
    let grid = field.grid();
    let a = grid.normal_axis();
    let keep = HalfField::normal_len(grid);
    let data = (0..grid.len())
        .filter(|&f| grid.multi_index(f)[a] < keep)
        .map(|f| field.values()[f])
        .collect();
    HalfField { grid: grid.clone(), data }
}

/// Half-space initial data, same component layout as [`FieldState`].
#[derive(Debug, Clone)]
pub struct HalfState {
    pub time: f64,
    pub e: Vec<HalfField>,
    pub h: Vec<HalfField>,
}

pub fn extend_state(half: &HalfState, plan: &ParityPlan) -> Result<FieldState> {
    let names_e = ["E1", "E2", "E3"];
    let names_h: &[&str] = if half.h.len() == 1 { &["H"] } else { &["H1", "H2", "H3"] };
    let mut violations = Vec::new();
    let mut e = Vec::new();
    let mut h = Vec::new();
    let mut run = |f: &HalfField, p: Parity, name: &str, out: &mut Vec<ScalarField>| -> Result<()> {
        match extend_half_to_torus(f, p) {
            Ok(x) => out.push(x),
            Err(MaxlabError::Compatibility(v)) => {
                violations.extend(v.into_iter().map(|t| TraceViolation { component: name.to_string(), trace: t.trace }))
            }
            Err(other) => return Err(other),
        }
        Ok(())
    };
    for (i, (f, &p)) in half.e.iter().zip(&plan.e).enumerate() {
        run(f, p, names_e[i], &mut e)?;
    }
    for (i, (f, &p)) in half.h.iter().zip(&plan.h).enumerate() {
        run(f, p, names_h[i], &mut h)?;
    }
    if !violations.is_empty() {
        return Err(MaxlabError::Compatibility(violations));
    }
    FieldState::new(half.time, e, h)
}

/// One row of the compatibility report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CompatResidual {
    pub id: String,
    pub order: usize,
    pub residual: f64,
}

fn plane_l2(f: &ScalarField) -> f64 {
    let g = f.grid();
    let a = g.normal_axis();
    let area: f64 = (0..g.dim()).filter(|&ax| ax != a).map(|ax| g.spacing(ax)).product();
    (f.plane(a, 0).iter().map(|v| v * v).sum::<f64>() * area).sqrt()
}

/// Fourth-order one-sided derivative at the boundary plane, from half-space samples.
fn one_sided_normal_slope(f: &ScalarField) -> f64 {
    let g = f.grid();
    let a = g.normal_axis();
    let h = g.spacing(a);
    let planes: Vec<Vec<f64>> = (0..5).map(|j| f.plane(a, j)).collect();
    let c = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25];
    (0..planes[0].len())
        .map(|k| (0..5).map(|j| c[j] * planes[j][k]).sum::<f64>().abs() / h)
        .fold(0.0, f64::max)
}

/// Boundary-plane L2 norms of the compatibility expressions up to `order`.
/// Geodesic form with the normal axis last.
pub fn compatibility_residuals(state: &FieldState, coeffs: &CoefficientSet, order: usize) -> Result<Vec<CompatResidual>> {
    let g = state.grid();
    if order > 2 {
        return Err(MaxlabError::InvalidInput(format!("compatibility order {order} not in 0..=2")));
    }
    if g.normal_axis() != g.dim() - 1 {
        return Err(MaxlabError::Unsupported("compatibility checks assume the normal axis is last".into()));
    }
    g.same_as(&coeffs.grid)?;
    let mut out = Vec::new();
    let mut push = |id: &str, ord: usize, f: &ScalarField| {
        out.push(CompatResidual { id: id.to_string(), order: ord, residual: plane_l2(f) })
    };
    let e = &state.e;
    let h = &state.h;
    if g.dim() == 3 {
        push("E1", 0, &e[0]);
        push("E2", 0, &e[1]);
        push("H3", 0, &h[2]);
        if order >= 1 {
            push("d3H1", 1, &derivative(&h[0], 2));
            push("d3H2", 1, &derivative(&h[1], 2));
        }
        if order >= 2 {
            check_mu_flat_at_boundary(coeffs)?;
            let c1 = derivative(&e[2], 1).zip_with(&derivative(&e[1], 2), |a, b| a - b);
            let c2 = derivative(&e[0], 2).zip_with(&derivative(&e[2], 0), |a, b| a - b);
            let lower = lower_metric_2x2(&coeffs.cometric);
            let inv_sqrt_g = coeffs.sqrt_g.map(|v| 1.0 / v);
            let combo = |ga: &ScalarField, gb: &ScalarField| {
                let n = g.len();
                let mut v = vec![0.0; n];
                for p in 0..n {
                    v[p] = inv_sqrt_g.values()[p] * (ga.values()[p] * c1.values()[p] + gb.values()[p] * c2.values()[p]);
                }
                ScalarField::new(g, v).unwrap()
            };
            let x = combo(&lower[1], &lower[2]);
            let y = combo(&lower[0], &lower[1]);
            push("d3(g21,g22)", 2, &derivative(&x, 2));
            push("d3(g11,g12)", 2, &derivative(&y, 2));
        }
    } else {
        push("E1", 0, &e[0]);
        if order >= 1 {
            push("d2H", 1, &derivative(&h[0], 1));
        }
        if order >= 2 {
            check_mu_flat_at_boundary(coeffs)?;
            let c = derivative(&e[1], 0).zip_with(&derivative(&e[0], 1), |a, b| a - b);
            let w = coeffs.sqrt_g.zip_with(&c, |a, b| a * b);
            push("d2(sqrt_g curl E)", 2, &derivative(&w, 1));
        }
    }
    Ok(out)
}

fn check_mu_flat_at_boundary(coeffs: &CoefficientSet) -> Result<()> {
    let mu = &coeffs.mu;
    if mu.parity_defect(Parity::Even) > 1e-12 {
        return Err(MaxlabError::Unsupported("permeability is not even across the boundary".into()));
    }
    // a kink in the evenly extended permeability means a nonzero one-sided normal derivative
    let slope = one_sided_normal_slope(mu);
    if slope > 1e-3 * mu.max_abs().max(1.0) {
        return Err(MaxlabError::Unsupported(format!(
            "second-order conditions need a vanishing normal derivative of mu at the boundary (found {slope:.3e})"
        )));
    }
    Ok(())
}

/// Lower-index tangential metric `(g_11, g_12, g_22)` from the cometric block.
fn lower_metric_2x2(cometric: &SymTensorField) -> [ScalarField; 3] {
    let (a, b, c) = (cometric.get(0, 0), cometric.get(0, 1), cometric.get(1, 1));
    let det = a.zip_with(c, |x, y| x * y).zip_with(b, |d, y| d - y * y);
    [c.zip_with(&det, |x, d| x / d), b.zip_with(&det, |x, d| -x / d), a.zip_with(&det, |x, d| x / d)]
}

/// Half-space samples of the medium; the cometric entries are
/// `[g11, g12, g22]` in 3D (with `g33 = 1`, `g13 = g23 = 0`) and `[g11]` in 2D.
#[derive(Debug, Clone)]
pub struct GeodesicHalfData {
    pub epsilon: HalfField,
    pub mu: HalfField,
    pub cometric: Vec<HalfField>,
}

/// Extend the medium evenly and assemble the effective tensors.
pub fn geodesic_coefficients(data: &GeodesicHalfData) -> Result<CoefficientSet> {
    let grid = data.epsilon.grid().clone();
    if grid.normal_axis() != grid.dim() - 1 {
        return Err(MaxlabError::Unsupported("geodesic form assumes the normal axis is last".into()));
    }
    let even = |f: &HalfField| extend_half_to_torus(f, Parity::Even);
    let eps = even(&data.epsilon)?;
    let mu = even(&data.mu)?;
    let mut cometric = SymTensorField::zeros(&grid, grid.dim());
    match (grid.dim(), data.cometric.len()) {
        (3, 3) => {
            cometric.set(0, 0, even(&data.cometric[0])?);
            cometric.set(0, 1, even(&data.cometric[1])?);
            cometric.set(1, 1, even(&data.cometric[2])?);
            cometric.set(2, 2, ScalarField::constant(&grid, 1.0));
        }
        (2, 1) => {
            cometric.set(0, 0, even(&data.cometric[0])?);
            cometric.set(1, 1, ScalarField::constant(&grid, 1.0));
        }
        (d, k) => {
            return Err(MaxlabError::InvalidInput(format!("{d}D geodesic data needs {} cometric entries, got {k}", if d == 3 { 3 } else { 1 })))
        }
    }
    CoefficientSet::from_parts(eps, mu, cometric)
}

/// Convenience: sample the medium from closures on the half space.
pub fn geodesic_coefficients_from_fn(
    grid: &TorusGrid,
    epsilon: impl Fn([f64; 3]) -> f64,
    mu: impl Fn([f64; 3]) -> f64,
    cometric: &[&dyn Fn([f64; 3]) -> f64],
) -> Result<CoefficientSet> {
    geodesic_coefficients(&GeodesicHalfData {
        epsilon: HalfField::from_fn(grid, epsilon),
        mu: HalfField::from_fn(grid, mu),
        cometric: cometric.iter().map(|f| HalfField::from_fn(grid, f)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_line_odd() {
        let g = TorusGrid::cube(2, 16, 4.0).unwrap();
        let half = HalfField::from_fn(&g, |x| x[1]);
        let f = extend_half_to_torus(&half, Parity::Odd).unwrap();
        for flat in 0..g.len() {
            let j = g.multi_index(flat)[1];
            if j != 8 {
                assert!((f.values()[flat] - g.point(flat)[1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_even_and_odd_rejected() {
        let g = TorusGrid::cube(2, 8, 1.0).unwrap();
        let half = HalfField::from_fn(&g, |_| 1.0);
        let f = extend_half_to_torus(&half, Parity::Even).unwrap();
        assert!(f.values().iter().all(|&v| v == 1.0));
        assert!(matches!(extend_half_to_torus(&half, Parity::Odd), Err(MaxlabError::Compatibility(_))));
    }

    #[test]
    fn plan_3d_matches_reflection_rules() {
        let g = TorusGrid::cube(3, 4, 1.0).unwrap();
        let p = ParityPlan::for_grid(&g);
        use Parity::*;
        assert_eq!(p.e, vec![Odd, Odd, Even]);
        assert_eq!(p.h, vec![Even, Even, Odd]);
        assert_eq!(p.rho, Odd);
        let g2 = TorusGrid::cube(2, 4, 1.0).unwrap();
        let p2 = ParityPlan::for_grid(&g2);
        assert_eq!(p2.e, vec![Odd, Even]);
        assert_eq!(p2.h, vec![Even]);
    }
}
