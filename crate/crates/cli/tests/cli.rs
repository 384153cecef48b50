use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn maxlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxlab")).args(args).current_dir(dir).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

#[test]
fn check_symbols_default_config_passes() {
    let tmp = TempDir::new().unwrap();
    let o = maxlab(&["check-symbols", "--out", "sym"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("sym/residuals.csv")).unwrap();
    let res = column(&csv, "max_residual");
    assert_eq!(res.len(), 4, "{csv}");
    assert!(res.iter().all(|&r| r <= 1e-10), "{csv}");
    let m = manifest(&tmp.path().join("sym"));
    assert_eq!(m["status"], "pass");
    assert_eq!(m["config"]["data.seed"], "0");
    assert!(m["outputs"].to_string().contains("residuals.csv"));
}

#[test]
fn malformed_config_names_first_bad_key() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.cfg"), "[grid]\nn = 16\nspacing = 3\n[run]\nbogus = 1\n").unwrap();
    let o = maxlab(&["linear2d", "--config", "bad.cfg"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("grid.spacing"), "{e}");
    assert!(!e.contains("run.bogus"), "{e}");
    assert!(!tmp.path().join("runs").exists());
}

#[test]
fn bad_value_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("c.cfg"), "[run]\nintegrator = euler\n").unwrap();
    let o = maxlab(&["linear2d", "--config", "c.cfg"], tmp.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("run.integrator"));
}

#[test]
fn standing_wave_energy_is_flat() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("c.cfg"), "[grid]\nn = 32\n[run]\nt_final = 0.5\n[data]\nmodes = 1,2\n").unwrap();
    let o = maxlab(&["linear2d", "--config", "c.cfg", "--preset", "standing-wave", "--out", "sw"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let e = column(&fs::read_to_string(tmp.path().join("sw/norms.csv")).unwrap(), "energy");
    assert!(e.len() > 10);
    let e0 = e[0];
    assert!(e.iter().all(|v| (v - e0).abs() <= 1e-9 * e0), "{e:?}");
    assert!(tmp.path().join("sw/snapshots/t_000000.bin").exists());
}

#[test]
fn occupied_output_dir_needs_force() {
    let tmp = TempDir::new().unwrap();
    fs::create_dir(tmp.path().join("o")).unwrap();
    fs::write(tmp.path().join("o/keep.txt"), "x").unwrap();
    let o = maxlab(&["check-symbols", "--out", "o"], tmp.path());
    assert!(!o.status.success());
    assert!(!tmp.path().join("o/manifest.json").exists());
    let o = maxlab(&["check-symbols", "--out", "o", "--force"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn runs_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("c.cfg"), "[grid]\nn = 16\n[run]\nt_final = 0.2\n").unwrap();
    for d in ["a", "b"] {
        let o = maxlab(&["linear2d", "--config", "c.cfg", "--seed", "11", "--out", d], tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (a, b) = (manifest(&tmp.path().join("a")), manifest(&tmp.path().join("b")));
    assert_eq!(a["outputs"], b["outputs"]);
    assert_eq!(a["config"]["data.seed"], "11");
    let o = maxlab(&["linear2d", "--config", "c.cfg", "--seed", "12", "--out", "c"], tmp.path());
    assert!(o.status.success());
    assert_ne!(a["outputs"], manifest(&tmp.path().join("c"))["outputs"]);
}

#[test]
fn kerr_rejects_variable_media() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("c.cfg"), "[coefficients]\npreset = smooth\n").unwrap();
    let o = maxlab(&["kerr2d", "--config", "c.cfg", "--out", "k"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("flat"));
}

#[test]
fn print_config_lists_every_key() {
    let tmp = TempDir::new().unwrap();
    let o = maxlab(&["linear3d", "--print-config", "--seed", "5"], tmp.path());
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("[sweep]") && text.contains("seed = 5"), "{text}");
    assert!(!tmp.path().join("runs").exists());
}
