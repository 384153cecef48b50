//! The subcommands. Each returns an [`Outcome`]; outputs go through [`OutputDir`].

use log::info;
use maxlab_core::diagnostics::{
    admissible, bootstrap_functionals, gronwall_audit, helmholtz_ratio, strichartz_sweep, HelmholtzMode, History, Medium,
    SweepConfig,
};
use maxlab_core::envelope::sharp_envelope;
use maxlab_core::evolution::cylinder::{cylindrical_lift_and_compare, CylinderConfig};
use maxlab_core::evolution::kerr::{displacement, invert_constitutive, KerrMaxwell};
use maxlab_core::evolution::presets::{normalize, packet_2d, random_field, random_state, standing_wave, CoefficientPreset, DataKind};
use maxlab_core::evolution::{charge, charge_drift, vector_l2, EvolutionConfig, Integrator, LinearMaxwell, Nonlinearity};
use maxlab_core::io::write_snapshot;
use maxlab_core::lp::{truncate_coefficients, DyadicProjectorBank, TruncationScheme};
use maxlab_core::norms::NormReport;
use maxlab_core::ops::resample;
use maxlab_core::reflect::{compatibility_residuals, ParityPlan};
use maxlab_core::symbol::factorization_residual;
use maxlab_core::{CoefficientSet, FieldState, ScalarField, TorusGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::Config;
use crate::error::CliError;
use crate::output::{csv_text, num, OutputDir};

pub struct Outcome {
    pub violations: Vec<String>,
    pub summary: serde_json::Value,
}

impl Outcome {
    fn new(summary: serde_json::Value) -> Self {
        Self { violations: Vec::new(), summary }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.violations.push(what.into());
        }
    }
}

const PARITY_TOL: f64 = 1e-12;

fn grid(cfg: &Config, dim: usize) -> Result<TorusGrid, CliError> {
    Ok(TorusGrid::cube(dim, cfg.usize("grid.n")?, cfg.f64("grid.length")?)?)
}

fn medium(cfg: &Config, g: &TorusGrid) -> Result<CoefficientSet, CliError> {
    let preset = CoefficientPreset::parse(cfg.get("coefficients.preset"), cfg.f64("coefficients.amplitude")?)
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(preset.build(g)?)
}

fn integrator(cfg: &Config) -> Result<Integrator, CliError> {
    match cfg.get("run.integrator") {
        "leapfrog" => Ok(Integrator::Leapfrog),
        "rk4" => Ok(Integrator::Rk4),
        other => Err(CliError::Config(format!("key 'run.integrator': unknown integrator '{other}'"))),
    }
}

fn initial_state(cfg: &Config, g: &TorusGrid, coeffs: &CoefficientSet) -> Result<FieldState, CliError> {
    let seed = cfg.u64("data.seed")?;
    let band = cfg.f64("data.band")?;
    let kind = |k| random_state(g, coeffs, seed, 0.0, band, k);
    let state = match cfg.get("data.preset") {
        "random" => kind(DataKind::General)?,
        "charged" => kind(DataKind::Charged)?,
        "divergence-free" => kind(DataKind::DivergenceFree)?,
        "standing-wave" => {
            let m = cfg.f64_list("data.modes")?;
            if m.len() != 2 || m.iter().any(|v| v.fract() != 0.0) {
                return Err(CliError::Config("key 'data.modes': expected two integers".into()));
            }
            standing_wave(g, [m[0] as i64, m[1] as i64], 0.0)?
        }
        "packet" => {
            if g.dim() != 2 {
                return Err(CliError::Config("data preset 'packet' is two dimensional".into()));
            }
            let l = g.lengths();
            packet_2d(g, [0.5 * l[0], 0.25 * l[1]], 0.1 * l[0], band)?
        }
        other => return Err(CliError::Config(format!("key 'data.preset': unknown preset '{other}'"))),
    };
    match cfg.opt_f64("data.h2_norm")? {
        // half-space norm, i.e. the torus norm over sqrt 2
        Some(target) => Ok(normalize(&state, 2.0, target * 2f64.sqrt())?),
        None => Ok(state),
    }
}

fn evolution_config(cfg: &Config, nonlinearity: Nonlinearity) -> Result<EvolutionConfig, CliError> {
    Ok(EvolutionConfig {
        cfl: cfg.f64("run.cfl")?,
        t_final: cfg.f64("run.t_final")?,
        dt: cfg.opt_f64("run.dt")?,
        integrator: integrator(cfg)?,
        nonlinearity,
    })
}

fn write_state(out: &mut OutputDir, index: usize, s: &FieldState) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_snapshot(&mut buf, s)?;
    out.write(&format!("snapshots/t_{index:06}.bin"), &buf)
}

fn wants_snapshot(every: usize, k: usize, last: usize) -> bool {
    k == 0 || k == last || (every > 0 && k % every == 0)
}

pub fn linear(cfg: &Config, dim: usize, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let g = grid(cfg, dim)?;
    let coeffs = medium(cfg, &g)?;
    let ec = evolution_config(cfg, Nonlinearity::None)?;
    ec.validate(dim)?;
    let solver = LinearMaxwell::new(&coeffs)?;
    let (dt, steps) = ec.step_plan(&g, solver.max_wave_speed()?)?;
    let u0 = initial_state(cfg, &g, &coeffs)?;
    info!("linear{dim}d: {steps} steps of {dt:.4e} on {:?}", g.shape());

    let leapfrog = ec.integrator == Integrator::Leapfrog;
    let energy = |s: &FieldState| if leapfrog { solver.discrete_energy(s, dt) } else { solver.energy(s) };
    let plan = ParityPlan::for_grid(&g);
    let rho0 = charge(&u0, &coeffs);
    let d0 = vector_l2(&solver.displacement(&u0.e));
    let e0 = energy(&u0);
    let every = cfg.usize("run.snapshot_every")?;

    let mut report = NormReport::new(&g, cfg.f64_list("run.sobolev_orders")?);
    report.record(&u0, e0, 0.0)?;
    write_state(out, 0, &u0)?;
    let (mut ed, mut cd, mut pd) = (0.0f64, 0.0f64, plan.state_defect(&u0));
    let mut snaps = Vec::new();
    solver.evolve(&u0, dt, steps, ec.integrator, |k, s| {
        let e = energy(s);
        let c = charge_drift(&rho0, &charge(s, &coeffs), d0);
        ed = ed.max(if e0 > 0.0 { (e - e0).abs() / e0 } else { e.abs() });
        cd = cd.max(c);
        pd = pd.max(plan.state_defect(s));
        report.record(s, e, c)?;
        if k > 0 && wants_snapshot(every, k, steps) {
            snaps.push((k, s.clone()));
        }
        Ok(())
    })?;
    for (k, s) in &snaps {
        write_state(out, *k, s)?;
    }
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    out.write("norms.csv", &csv)?;

    let mut o = Outcome::new(json!({
        "steps": steps, "dt": dt, "energy_form": if leapfrog { "discrete" } else { "continuous" },
        "energy_drift": ed, "charge_drift": cd, "parity_defect": pd,
    }));
    let etol = cfg.f64("checks.energy_tol")?;
    if leapfrog {
        o.require(ed <= etol, format!("energy drift {ed:.3e} > {etol:e}"));
    }
    let ctol = cfg.f64("checks.charge_tol")?;
    o.require(cd <= ctol, format!("charge drift {cd:.3e} > {ctol:e}"));
    o.require(pd <= PARITY_TOL, format!("parity defect {pd:.3e}"));
    Ok(o)
}

pub fn kerr2d(cfg: &Config, out: &mut OutputDir) -> Result<Outcome, CliError> {
    if cfg.get("coefficients.preset") != "flat" {
        return Err(CliError::Config("kerr2d runs the isotropic Kerr medium; coefficients.preset must be flat".into()));
    }
    let g = grid(cfg, 2)?;
    let ec = evolution_config(cfg, Nonlinearity::Kerr2d)?;
    ec.validate(2)?;
    let kerr = KerrMaxwell::new(&g);
    let (dt, steps) = ec.step_plan(&g, kerr.max_wave_speed())?;
    let u0 = initial_state(cfg, &g, &CoefficientSet::flat(&g))?;
    info!("kerr2d: {steps} steps of {dt:.4e}");

    let rho0 = kerr.charge(&u0);
    let d0 = vector_l2(&displacement(&u0.e));
    let h0 = kerr.hamiltonian(&u0);
    let every = cfg.usize("run.snapshot_every")?;
    let round_trip = |s: &FieldState| -> Result<f64, CliError> {
        let back = invert_constitutive(&displacement(&s.e))?;
        let scale = s.e.iter().map(|f| f.max_abs()).fold(1.0, f64::max);
        Ok(back.iter().zip(&s.e).map(|(a, b)| a.zip_with(b, |x, y| x - y).max_abs()).fold(0.0, f64::max) / scale)
    };

    let mut report = NormReport::new(&g, cfg.f64_list("run.sobolev_orders")?);
    report.record(&u0, h0, 0.0)?;
    write_state(out, 0, &u0)?;
    let (mut cd, mut hd, mut trip) = (0.0f64, 0.0f64, round_trip(&u0)?);
    let mut states = vec![u0.clone()];
    kerr.evolve(&u0, dt, steps, ec.integrator, |_, s| {
        let h = kerr.hamiltonian(s);
        let c = charge_drift(&rho0, &kerr.charge(s), d0);
        cd = cd.max(c);
        hd = hd.max(if h0 > 0.0 { (h - h0).abs() / h0 } else { h.abs() });
        report.record(s, h, c)?;
        states.push(s.clone());
        Ok(())
    })?;
    for (k, s) in states.iter().enumerate().skip(1) {
        trip = trip.max(round_trip(s)?);
        if wants_snapshot(every, k, steps) {
            write_state(out, k, s)?;
        }
    }
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    out.write("norms.csv", &csv)?;

    let mut gronwall = serde_json::Value::Null;
    if states.len() >= 7 {
        let rows = bootstrap_functionals(&History::new(dt, states)?, &Medium::Kerr)?;
        let body: Vec<Vec<String>> =
            rows.iter().map(|r| vec![num(r.time), num(r.a1), num(r.a2), num(r.driver), num(r.grad_sup)]).collect();
        out.write("bootstrap.csv", csv_text(&["time", "a1", "a2", "driver", "grad_sup"], &body).as_bytes())?;
        let a = gronwall_audit(&rows)?;
        gronwall = json!({ "constant": a.constant, "a1_variation": a.a1_variation });
    }

    let mut o = Outcome::new(json!({
        "steps": steps, "dt": dt, "charge_drift": cd, "hamiltonian_drift": hd,
        "constitutive_round_trip": trip, "gronwall": gronwall,
    }));
    let ctol = cfg.f64("checks.charge_tol")?;
    o.require(cd <= ctol, format!("charge drift {cd:.3e} > {ctol:e}"));
    o.require(trip <= 1e-12, format!("D to E round trip {trip:.3e}"));
    Ok(o)
}

pub fn check_symbols(cfg: &Config, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let lambda = cfg.f64("symbols.lambda")?;
    let samples = cfg.usize("symbols.samples")?;
    let tol = cfg.f64("symbols.tolerance")?;
    let seed = cfg.u64("data.seed")?;
    let mut body = Vec::new();
    let mut worst = 0.0f64;
    let mut ortho = 0.0f64;
    for dim in [2, 3] {
        let g = grid(cfg, dim)?;
        let c = truncate_coefficients(&medium(cfg, &g)?, lambda, TruncationScheme::B)?;
        for r in factorization_residual(&c, lambda, samples, seed + dim as u64)? {
            worst = worst.max(r.max_residual);
            ortho = ortho.max(r.max_orthonormality_defect);
            body.push(vec![
                dim.to_string(),
                r.branch.to_string(),
                r.samples.to_string(),
                num(r.max_residual),
                num(r.max_orthonormality_defect),
            ]);
        }
    }
    out.write(
        "residuals.csv",
        csv_text(&["dim", "branch", "samples", "max_residual", "orthonormality_defect"], &body).as_bytes(),
    )?;
    let mut o = Outcome::new(json!({ "max_residual": worst, "max_orthonormality_defect": ortho }));
    o.require(worst <= tol, format!("factorization residual {worst:.3e} > {tol:e}"));
    o.require(ortho <= 1e-12, format!("orthonormality defect {ortho:.3e}"));
    Ok(o)
}

fn electric_field(g: &TorusGrid, rng: &mut ChaCha8Rng, hi: f64) -> Vec<ScalarField> {
    ParityPlan::for_grid(g).e.iter().map(|&p| random_field(g, rng, 0.0, hi, p)).collect()
}

pub fn check_helmholtz(cfg: &Config, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let dim = cfg.usize("helmholtz.dim")?;
    let coarse = grid(cfg, dim)?;
    let fine = TorusGrid::cube(dim, 2 * coarse.shape()[0], coarse.lengths()[0])?;
    let nfields = cfg.usize("helmholtz.fields")?;
    let orders = cfg.f64_list("helmholtz.orders")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.u64("data.seed")?);
    let kmax = coarse.max_deriv_xi_norm() / dim as f64;
    let (mut c1, mut c2, mut identity) = (1.0f64, 1.0f64, 0.0f64);
    let mut body = Vec::new();
    for k in 0..nfields {
        // torus identity on unstructured noise
        let noise: Vec<ScalarField> = (0..dim)
            .map(|_| ScalarField::new(&coarse, (0..coarse.len()).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect::<Result<_, _>>()?;
        let id = helmholtz_ratio(&noise, 0.0, HelmholtzMode::Torus)?.identity_residual.unwrap_or(0.0);
        identity = identity.max(id);
        let hi = 1.0 + (kmax - 1.0) * k as f64 / nfields.max(2).saturating_sub(1) as f64;
        let e = electric_field(&coarse, &mut rng, hi.max(1.0));
        let ef: Vec<ScalarField> = e.iter().map(|f| resample(f, &fine)).collect::<Result<_, _>>()?;
        for &s in &orders {
            let r1 = helmholtz_ratio(&e, s, HelmholtzMode::Half)?.ratio;
            let r2 = helmholtz_ratio(&ef, s, HelmholtzMode::Half)?.ratio;
            c1 = c1.max(r1).max(1.0 / r1);
            c2 = c2.max(r2).max(1.0 / r2);
            body.push(vec![k.to_string(), num(s), num(hi), num(r1), num(r2), num(id)]);
        }
    }
    out.write(
        "helmholtz.csv",
        csv_text(&["field", "s", "band", "ratio", "ratio_refined", "torus_identity_residual"], &body).as_bytes(),
    )?;
    let change = c2 / c1 - 1.0;
    let mut o = Outcome::new(json!({ "constant": c1, "constant_refined": c2, "relative_change": change, "torus_identity": identity }));
    o.require(identity <= 1e-10, format!("torus identity residual {identity:.3e}"));
    o.require(change.abs() <= 0.1, format!("constant moved by {change:.3} under refinement"));
    Ok(o)
}

pub fn check_envelopes(cfg: &Config, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let g = grid(cfg, 2)?;
    let bank = DyadicProjectorBank::new(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.u64("data.seed")?);
    let nfields = cfg.usize("envelopes.fields")?;
    let kmax = g.max_deriv_xi_norm();
    let (mut excess, mut slow, mut l2r) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    let mut body = Vec::new();
    for k in 0..nfields {
        let hi = 2.0 + (kmax - 2.0) * k as f64 / nfields.max(2).saturating_sub(1) as f64;
        let f = random_field(&g, &mut rng, 0.0, hi, maxlab_core::Parity::Odd);
        for &s in &cfg.f64_list("envelopes.orders")? {
            for &delta in &cfg.f64_list("envelopes.deltas")? {
                let env = sharp_envelope(&[&f], s, delta, &bank)?;
                let ax = env.axioms();
                excess = excess.max(ax.energy_excess);
                slow = slow.max(ax.slowly_varying);
                l2r = l2r.max(ax.l2_ratio);
                for ((b, ct), c) in env.bands.iter().zip(&env.c_tilde).zip(&env.c) {
                    body.push(vec![k.to_string(), num(s), num(delta), num(*b), num(*ct), num(*c)]);
                }
            }
        }
    }
    out.write("envelopes.csv", csv_text(&["field", "s", "delta", "band", "c_tilde", "c"], &body).as_bytes())?;
    let mut o = Outcome::new(json!({ "energy_excess": excess, "slowly_varying": slow, "l2_ratio": l2r }));
    o.require(excess <= 0.0, format!("envelope below the band energy by {excess:.3e}"));
    o.require(slow <= 1.0 + 1e-12, format!("slowly varying ratio {slow}"));
    o.require(l2r <= 1.0, format!("l2 ratio {l2r}"));
    Ok(o)
}

pub fn check_compat(cfg: &Config, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let dim = cfg.usize("compat.dim")?;
    let g = grid(cfg, dim)?;
    let coeffs = medium(cfg, &g)?;
    let u0 = initial_state(cfg, &g, &coeffs)?;
    let rows = compatibility_residuals(&u0, &coeffs, cfg.usize("compat.order")?)?;
    let body: Vec<Vec<String>> = rows.iter().map(|r| vec![r.id.clone(), r.order.to_string(), num(r.residual)]).collect();
    out.write("compat.csv", csv_text(&["condition", "order", "residual"], &body).as_bytes())?;
    let scale = u0.max_abs().max(1.0);
    let zeroth = rows.iter().filter(|r| r.order == 0).map(|r| r.residual).fold(0.0, f64::max);
    // higher orders are reported, the parity plan only enforces order 0
    let mut o = Outcome::new(json!({ "order0": zeroth, "rows": rows }));
    o.require(zeroth <= 1e-10 * scale, format!("order-0 compatibility residual {zeroth:.3e}"));
    Ok(o)
}

fn parse_exponents(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    text.split(',')
        .map(|pair| {
            let (p, q) = pair.trim().split_once(':').ok_or_else(|| CliError::Config(format!("key 'sweep.exponents': bad pair '{pair}'")))?;
            let f = |s: &str| match s.trim() {
                "inf" => Ok(f64::INFINITY),
                v => v.parse::<f64>().map_err(|_| CliError::Config(format!("key 'sweep.exponents': bad exponent '{v}'"))),
            };
            Ok((f(p)?, f(q)?))
        })
        .collect()
}

/// Relative rise of a level median that still counts as non-increasing.
pub const REFINEMENT_SLACK: f64 = 1e-3;

pub fn strichartz(cfg: &Config, workers: usize, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let dim = cfg.usize("sweep.dim")?;
    let mut sc = SweepConfig::standard(dim);
    if cfg.get("sweep.exponents") != "auto" {
        sc.exponents = parse_exponents(cfg.get("sweep.exponents"))?;
    }
    for &(p, q) in &sc.exponents {
        admissible(p, q, dim)?;
    }
    let first = cfg.u64("data.seed")?;
    sc.seeds = (first..first + cfg.u64("sweep.seeds")?).collect();
    sc.lambdas = cfg.f64_list("sweep.lambdas")?;
    sc.refinements = cfg.usize("sweep.refinements")?;
    sc.t_final = cfg.f64("sweep.t_final")?;
    sc.cfl = cfg.f64("run.cfl")?;
    sc.coefficients = CoefficientPreset::Smooth { amplitude: cfg.f64("sweep.coefficient_amplitude")? };
    sc.fine_quadrature = match cfg.get("sweep.fine_quadrature") {
        "true" => true,
        "false" => false,
        v => return Err(CliError::Config(format!("key 'sweep.fine_quadrature': expected true or false, got '{v}'"))),
    };
    sc.workers = workers;
    info!("strichartz sweep: {} members on {} workers", sc.seeds.len() * sc.lambdas.len(), workers);
    let (rows, summaries) = strichartz_sweep(&sc)?;
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![r.seed.to_string(), r.n.to_string(), num(r.lambda), num(r.p), num(r.q), num(r.gamma), num(r.delta), num(r.ratio)]
        })
        .collect();
    out.write("sweep.csv", csv_text(&["seed", "grid", "lambda", "p", "q", "gamma", "delta", "ratio"], &body).as_bytes())?;
    out.write_json("summary.json", &summaries)?;
    let mut o = Outcome::new(serde_json::to_value(&summaries)?);
    for s in &summaries {
        o.require(s.spread <= 100.0, format!("({}, {}) spread {:.3}", s.p, s.q, s.spread));
        o.require(
            s.worst_increase <= REFINEMENT_SLACK,
            format!("({}, {}) median rose by {:.3e} under refinement", s.p, s.q, s.worst_increase),
        );
    }
    Ok(o)
}

pub fn cylinder(cfg: &Config, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let g = grid(cfg, 2)?;
    let coeffs = medium(cfg, &g)?;
    let u0 = initial_state(cfg, &g, &coeffs)?;
    let mut cc = CylinderConfig::for_horizon(cfg.f64("cylinder.t_final")?, cfg.usize("cylinder.n3")?)?;
    cc.cfl = cfg.f64("run.cfl")?;
    let r = cylindrical_lift_and_compare(&u0, &coeffs, &cc)?;
    let body = vec![vec![
        num(r.dt),
        r.steps.to_string(),
        num(r.discrepancy),
        num(r.relative_discrepancy),
        num(r.plateau_derivative),
    ]];
    out.write(
        "cylinder.csv",
        csv_text(&["dt", "steps", "discrepancy", "relative_discrepancy", "plateau_derivative"], &body).as_bytes(),
    )?;
    let mut o = Outcome::new(json!({
        "discrepancy": r.discrepancy, "relative_discrepancy": r.relative_discrepancy,
        "plateau_derivative": r.plateau_derivative, "length3": cc.length3, "plateau": cc.plateau, "ramp": cc.ramp,
    }));
    o.require(r.discrepancy <= 1e-6, format!("discrepancy {:.3e}", r.discrepancy));
    o.require(r.plateau_derivative <= 1e-10, format!("plateau derivative {:.3e}", r.plateau_derivative));
    Ok(o)
}
