//! Output directory, content hashes and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::CliError;

/// SHA-256 over `blob <len>\0<content>`, the git object layout.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

pub struct OutputDir {
    root: PathBuf,
    files: Vec<OutputFile>,
    started: Instant,
}

impl OutputDir {
    /// Refuses a non-empty directory unless `force` is set.
    pub fn create(root: &Path, force: bool) -> Result<Self, CliError> {
        if root.exists() {
            let occupied = fs::read_dir(root)?.next().is_some();
            if occupied && !force {
                return Err(CliError::Config(format!("output directory {} is not empty (use --force)", root.display())));
            }
        }
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new(), started: Instant::now() })
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.files.push(OutputFile { path: rel.to_string(), sha256: content_hash(bytes), bytes: bytes.len() });
        Ok(())
    }

    pub fn write_json(&mut self, rel: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut s = serde_json::to_vec_pretty(value)?;
        s.push(b'\n');
        self.write(rel, &s)
    }

    /// Writes `manifest.json`; the manifest itself is not hashed.
    pub fn finish(self, experiment: &str, cfg: &Config, passed: bool, summary: serde_json::Value) -> Result<(), CliError> {
        let manifest = serde_json::json!({
            "experiment": experiment,
            "tool": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
            "config": cfg.echo(),
            "status": if passed { "pass" } else { "invariant violated" },
            "summary": summary,
            "outputs": self.files,
            "timings": { "wall_seconds": self.started.elapsed().as_secs_f64() },
        });
        let mut s = serde_json::to_vec_pretty(&manifest)?;
        s.push(b'\n');
        fs::write(self.root.join("manifest.json"), s)?;
        Ok(())
    }
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

pub fn num(v: f64) -> String {
    format!("{v:.17e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_matches_git_blob_layout() {
        // sha256 of "blob 0\0"
        assert_eq!(content_hash(b""), "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813");
    }

    #[test]
    fn collision_needs_force() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("x"), b"1").unwrap();
        assert!(OutputDir::create(dir.path(), false).is_err());
        assert!(OutputDir::create(dir.path(), true).is_ok());
    }
}
