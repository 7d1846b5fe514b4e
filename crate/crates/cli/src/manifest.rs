use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::Failure;

/// JSON record written next to every output. Feeding it back through
/// `--config` reproduces the run.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub resolved_config: String,
    pub method: Option<String>,
    pub outputs: Vec<String>,
    /// Column name to unit.
    pub units: BTreeMap<String, String>,
    pub results: Value,
}

impl Manifest {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        Self {
            tool: "ionwire",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            config_hash: cfg.hash(),
            resolved_config: cfg.echo(),
            method: None,
            outputs: vec![],
            units: BTreeMap::new(),
            results: Value::Null,
        }
    }

    pub fn units(mut self, pairs: &[(&str, &str)]) -> Self {
        self.units.extend(pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())));
        self
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Failure::Io(e.to_string()))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }
}

pub fn output_dir(dir: &str) -> Result<PathBuf, Failure> {
    let p = PathBuf::from(dir);
    fs::create_dir_all(&p).map_err(|e| Failure::Io(format!("cannot create {}: {e}", p.display())))?;
    Ok(p)
}

pub fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}
