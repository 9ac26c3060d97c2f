use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// One record per invocation, written as `manifest.json` in the output
/// directory.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub version: &'static str,
    pub seed: u64,
    pub instance: Option<Value>,
    pub config: Value,
    pub outputs: Vec<String>,
    pub counters: BTreeMap<String, Value>,
    pub status: String,
    pub exit_code: i32,
    pub wall_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.into(),
            args: std::env::args().skip(1).collect(),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            instance: None,
            config: Value::Null,
            outputs: Vec::new(),
            counters: BTreeMap::new(),
            status: "ok".into(),
            exit_code: 0,
            wall_seconds: 0.0,
        }
    }

    pub fn count(&mut self, key: &str, value: impl Into<Value>) {
        self.counters.insert(key.into(), value.into());
    }

    /// Writes `contents` to `dir/name` and records it as an output.
    pub fn emit(&mut self, dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        fs::write(&path, contents)?;
        self.outputs.push(path.display().to_string());
        Ok(path)
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(dir.join("manifest.json"), body + "\n")
    }
}
