use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

/// Record of one command invocation, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    /// SHA-256 of the command name and parameters in canonical JSON.
    pub config_hash: String,
    pub tool_version: String,
    /// File names relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub measured: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    pub wall_clock_seconds: f64,
}

pub fn config_hash(command: &str, parameters: &Value) -> String {
    let canonical = serde_json::to_string(&(command, parameters)).expect("JSON values always serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Collects output files and measurements for one run directory.
pub struct RunRecorder {
    dir: PathBuf,
    manifest: RunManifest,
    started: Instant,
}

impl RunRecorder {
    pub fn new<P: Serialize>(dir: &Path, command: &str, parameters: &P) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let parameters = serde_json::to_value(parameters).expect("argument structs serialize");
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                command: command.to_string(),
                config_hash: config_hash(command, &parameters),
                parameters,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                outputs: Vec::new(),
                measured: BTreeMap::new(),
                warnings: Vec::new(),
                wall_clock_seconds: 0.0,
            },
            started: Instant::now(),
        })
    }

    /// Creates `name` in the run directory and hands a buffered writer to `fill`.
    pub fn write_file(
        &mut self,
        name: &str,
        fill: impl FnOnce(&mut BufWriter<File>) -> ggwave_core::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut out = BufWriter::new(file);
        fill(&mut out)?;
        out.flush().map_err(|e| CliError::io(&path, e))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    pub fn measure(&mut self, name: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("measurements serialize");
        self.manifest.measured.insert(name.to_string(), value);
    }

    pub fn warn(&mut self, message: String) {
        self.manifest.warnings.push(message);
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.manifest.wall_clock_seconds = self.started.elapsed().as_secs_f64();
        let path = self.dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
