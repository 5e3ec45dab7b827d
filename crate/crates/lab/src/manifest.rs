//! Output files with checksums, and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use schonmann_core::ising::RunDiagnostics;

use crate::config::RunConfig;
use crate::error::LabError;

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Write through a temporary file and rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), LabError> {
    let tmp = path.with_extension("tmp~");
    let mut f = fs::File::create(&tmp).map_err(|e| LabError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| LabError::io(&tmp, e))?;
    f.sync_all().map_err(|e| LabError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| LabError::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// A statistical check; a failed check makes the run exit with status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub p_value: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, p_value: Option<f64>, detail: String) -> Self {
        Check {
            name: name.to_string(),
            passed,
            p_value,
            detail,
        }
    }
}

/// Collects the files of one run inside its output directory.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, LabError> {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), LabError> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.files.push(OutputFile {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// Comma-separated, LF-terminated, with a header row.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), LabError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::io(name, e.into_error()))?;
        self.write(name, &bytes)
    }
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub config: RunConfig,
    pub files: Vec<OutputFile>,
    pub checks: Vec<Check>,
    pub wall_clock_seconds: f64,
    pub diagnostics: Option<RunDiagnostics>,
    pub notes: Vec<(String, Value)>,
}

impl Manifest {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        let files: Vec<Value> = self
            .files
            .iter()
            .map(|f| json!({"name": f.name, "sha256": f.sha256, "bytes": f.bytes}))
            .collect();
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({"name": c.name, "passed": c.passed, "p_value": c.p_value, "detail": c.detail}))
            .collect();
        let diag = self.diagnostics.map(|d| {
            json!({
                "samples": d.samples,
                "sweeps": d.sweeps,
                "max_coalescence_sweeps": d.max_coalescence,
                "mean_coalescence_sweeps": d.mean_coalescence,
            })
        });
        let notes: serde_json::Map<String, Value> = self.notes.iter().cloned().collect();
        json!({
            "artifact_version": env!("CARGO_PKG_VERSION"),
            "experiment": self.config.experiment.name(),
            "seed": self.config.seed,
            "config": self.config.echo(),
            "files": files,
            "checks": checks,
            "status": if self.all_passed() { "ok" } else { "statistical-check-failed" },
            "wall_clock_seconds": self.wall_clock_seconds,
            "coalescence": diag,
            "notes": notes,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<(), LabError> {
        let mut text = serde_json::to_string_pretty(&self.to_json())?;
        text.push('\n');
        write_atomic(&dir.join(MANIFEST_NAME), text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn csv_layout() {
        let dir = std::env::temp_dir().join(format!("schonmann-lab-csv-{}", std::process::id()));
        let mut o = OutputDir::create(&dir).unwrap();
        o.write_csv("t.csv", &["a", "b"], &[vec!["1".into(), "0.5".into()]]).unwrap();
        let text = fs::read_to_string(dir.join("t.csv")).unwrap();
        assert_eq!(text, "a,b\n1,0.5\n");
        assert_eq!(o.files()[0].sha256, sha256_hex(text.as_bytes()));
        fs::remove_dir_all(&dir).unwrap();
    }
}
