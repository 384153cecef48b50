//! Strict `key = value` configuration with `[section]` headers.
//!
//! Every accepted key is listed in [`KEYS`]; anything else is rejected with
//! the first offending key named.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::CliError;

/// `(section.key, default, description)`
pub const KEYS: &[(&str, &str, &str)] = &[
    ("grid.n", "32", "points per axis"),
    ("grid.length", "6.283185307179586", "torus period per axis (the half space is half of it)"),
    ("run.t_final", "1.0", "final time"),
    ("run.cfl", "0.4", "fraction of the stable step, in (0, 0.5]"),
    ("run.dt", "auto", "explicit step, or auto to derive it from run.cfl"),
    ("run.integrator", "leapfrog", "leapfrog or rk4"),
    ("run.snapshot_every", "0", "write snapshots every k steps; 0 keeps the first and last only"),
    ("run.sobolev_orders", "0,1,2", "Sobolev orders reported per step"),
    ("coefficients.preset", "flat", "flat, smooth, geodesic or kink"),
    ("coefficients.amplitude", "0.2", "coefficient perturbation size, in [0, 0.9)"),
    ("data.preset", "random", "random, charged, divergence-free, standing-wave or packet"),
    ("data.seed", "0", "seed of the random data and of the sampling checks"),
    ("data.band", "8", "upper frequency of random data"),
    ("data.h2_norm", "none", "rescale the data to this half-space H^2 norm"),
    ("data.modes", "1,1", "standing-wave mode numbers (tangential, normal)"),
    ("symbols.lambda", "64", "frequency scale of the factorization check"),
    ("symbols.samples", "1000", "samples per branch"),
    ("symbols.tolerance", "1e-10", "largest accepted factorization residual"),
    ("helmholtz.dim", "2", "dimension of the Helmholtz check"),
    ("helmholtz.fields", "50", "random fields per order"),
    ("helmholtz.orders", "0,1", "Sobolev orders s"),
    ("envelopes.fields", "10", "random fields"),
    ("envelopes.orders", "0,1", "Sobolev orders s"),
    ("envelopes.deltas", "0.1,0.25,0.5", "envelope losses delta"),
    ("compat.dim", "3", "dimension of the compatibility check"),
    ("compat.order", "2", "highest compatibility order, at most 2"),
    ("sweep.dim", "3", "dimension of the Strichartz sweep"),
    ("sweep.exponents", "auto", "p:q pairs such as inf:2,4:8; auto picks the standard set"),
    ("sweep.seeds", "20", "number of data seeds, counted from data.seed"),
    ("sweep.lambdas", "4,8,16,32,64", "frequency scales"),
    ("sweep.refinements", "3", "grid refinement levels"),
    ("sweep.t_final", "0.125", "horizon of each run"),
    ("sweep.fine_quadrature", "false", "evaluate L^q norms on the finest grid at every level"),
    ("sweep.coefficient_amplitude", "0.2", "amplitude of the smooth sweep medium"),
    ("cylinder.t_final", "1.0", "horizon of the cylinder comparison"),
    ("cylinder.n3", "128", "points along the cylinder axis, above 92"),
    ("checks.energy_tol", "1e-9", "largest accepted relative energy drift"),
    ("checks.charge_tol", "1e-10", "largest accepted relative charge drift"),
];

#[derive(Debug, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
    /// Keys that came from the file or the command line.
    explicit: Vec<String>,
}

impl Default for Config {
    fn default() -> Self {
        Self { values: KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect(), explicit: Vec::new() }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut section: Option<String> = None;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| CliError::Config(format!("line {}: bad section header '{line}'", no + 1)))?;
                let name = name.trim();
                if !KEYS.iter().any(|(k, _, _)| k.split('.').next() == Some(name)) {
                    return Err(CliError::Config(format!("line {}: unknown section '{name}'", no + 1)));
                }
                section = Some(name.to_string());
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value, got '{line}'", no + 1)))?;
            let sec = section
                .as_ref()
                .ok_or_else(|| CliError::Config(format!("line {}: key '{}' outside any section", no + 1, k.trim())))?;
            cfg.set(&format!("{sec}.{}", k.trim()), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if !self.values.contains_key(key) {
            return Err(CliError::Config(format!("unknown key '{key}'")));
        }
        if value.is_empty() {
            return Err(CliError::Config(format!("key '{key}' has an empty value")));
        }
        self.values.insert(key.to_string(), value.to_string());
        if !self.explicit.iter().any(|k| k == key) {
            self.explicit.push(key.to_string());
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("key '{key}' missing from the schema"))
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.iter().any(|k| k == key)
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        parse_f64(self.get(key)).ok_or_else(|| bad(key, self.get(key), "a number"))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            "auto" | "none" => Ok(None),
            _ => self.f64(key).map(Some),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.get(key).parse().map_err(|_| bad(key, self.get(key), "a non-negative integer"))
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        self.get(key).parse().map_err(|_| bad(key, self.get(key), "a non-negative integer"))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        self.get(key)
            .split(',')
            .map(|s| parse_f64(s.trim()).ok_or_else(|| bad(key, self.get(key), "a comma separated list of numbers")))
            .collect()
    }

    /// Resolved configuration, for the manifest.
    pub fn echo(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        _ => s.parse().ok().filter(|v: &f64| v.is_finite()),
    }
}

fn bad(key: &str, value: &str, want: &str) -> CliError {
    CliError::Config(format!("key '{key}': expected {want}, got '{value}'"))
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut section = "";
        for (k, v) in &self.values {
            let (s, name) = k.split_once('.').unwrap_or(("", k));
            if s != section {
                writeln!(f, "[{s}]")?;
                section = s;
            }
            writeln!(f, "{name} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let c = Config::parse("# run\n[grid]\nn = 16  # small\n[run]\nintegrator=rk4\n").unwrap();
        assert_eq!(c.usize("grid.n").unwrap(), 16);
        assert_eq!(c.get("run.integrator"), "rk4");
        assert!(c.is_explicit("grid.n") && !c.is_explicit("grid.length"));
    }

    #[test]
    fn first_unknown_key_is_named() {
        let e = Config::parse("[grid]\nn = 8\nsize = 3\nbogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("grid.size"), "{e}");
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(Config::parse("n = 3").is_err());
        assert!(Config::parse("[grid\n").is_err());
        assert!(Config::parse("[nowhere]\n").is_err());
        assert!(Config::parse("[grid]\nn\n").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let c = Config::default();
        let again = Config::parse(&c.to_string()).unwrap();
        assert_eq!(again.echo(), c.echo());
    }
}
