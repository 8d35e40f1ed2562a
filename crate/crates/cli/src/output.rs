//! Report files: `summary.json`, CSV tables and binary fields with JSON
//! sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use nash_core::holder::Field;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::RunError;

/// One asserted tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Value,
    pub threshold: Value,
    pub passed: bool,
}

impl Check {
    pub fn new(name: &str, value: impl Serialize, threshold: impl Serialize, passed: bool) -> Self {
        Check {
            name: name.into(),
            value: serde_json::to_value(value).unwrap_or(Value::Null),
            threshold: serde_json::to_value(threshold).unwrap_or(Value::Null),
            passed,
        }
    }
}

/// What a subcommand hands back to the driver.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: serde_json::Map<String, Value>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn set(&mut self, key: &str, v: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Shortest round-trip formatting, so equal values give equal bytes.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn csv<R: AsRef<[String]>>(&mut self, name: &str, header: &[&str], rows: &[R]) -> Result<(), RunError> {
        let path = self.root.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| RunError::Io(e.to_string()))?;
        w.write_record(header).map_err(|e| RunError::Io(e.to_string()))?;
        for r in rows {
            w.write_record(r.as_ref()).map_err(|e| RunError::Io(e.to_string()))?;
        }
        w.flush()?;
        self.files.push(name.into());
        Ok(())
    }

    /// `name.bin` in the flat layout of [`Field::to_bytes`] and `name.json`.
    pub fn field(&mut self, name: &str, f: &Field) -> Result<(), RunError> {
        let bin = format!("{name}.bin");
        fs::write(self.root.join(&bin), f.to_bytes())?;
        let grid = f.grid();
        let sidecar = json!({
            "format": "f64 little-endian; header N, M (u64), L (f64), K (u64); values slice by slice, nodes row-major with axis 0 slowest",
            "data": bin,
            "dim": grid.dim(),
            "points": grid.points(),
            "half_width": grid.half_width(),
            "spacing": grid.spacing(),
            "time_count": f.time_count(),
            "times": f.times(),
            "player": f.player(),
        });
        let side = format!("{name}.json");
        fs::write(self.root.join(&side), serde_json::to_string_pretty(&sidecar).expect("plain JSON"))?;
        self.files.push(bin);
        self.files.push(side);
        Ok(())
    }

    pub fn summary(&self, v: &Value) -> Result<(), RunError> {
        fs::write(self.root.join("summary.json"), serde_json::to_string_pretty(v).expect("plain JSON") + "\n")?;
        Ok(())
    }
}

/// Hex SHA-256 of the compact serialization of `config`.
pub fn content_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}
