use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cli::Cli;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
    pub detail: String,
}

/// Provenance for one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// Every flag, defaults included.
    pub cli: Cli,
    pub inputs: Vec<FileHash>,
    /// SHA-256 over the parameter set and the input hashes. JSON outputs
    /// carry it as `inputs_hash`.
    pub inputs_hash: String,
    pub outputs: Vec<FileHash>,
    pub wall_time_s: f64,
    pub stages: Vec<Stage>,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_bytes(&bytes))
}

/// Collects inputs, outputs and stage timings while a command runs.
pub struct Recorder {
    cli: Cli,
    start: Instant,
    stage_start: Instant,
    inputs: Vec<FileHash>,
    outputs: Vec<FileHash>,
    stages: Vec<Stage>,
}

impl Recorder {
    pub fn new(cli: &Cli) -> Self {
        let now = Instant::now();
        Recorder {
            cli: cli.clone(),
            start: now,
            stage_start: now,
            inputs: Vec::new(),
            outputs: Vec::new(),
            stages: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let sha256 = sha256_file(path)?;
        self.inputs.push(FileHash { path: path.to_path_buf(), sha256 });
        Ok(())
    }

    pub fn stage(&mut self, name: &str, detail: impl Into<String>) {
        let now = Instant::now();
        self.stages.push(Stage {
            name: name.into(),
            seconds: (now - self.stage_start).as_secs_f64(),
            detail: detail.into(),
        });
        self.stage_start = now;
    }

    pub fn inputs_hash(&self) -> String {
        let params = serde_json::to_string(&self.cli).expect("plain data serializes");
        let mut h = Sha256::new();
        h.update(params.as_bytes());
        for f in &self.inputs {
            h.update(f.sha256.as_bytes());
        }
        hex(&h.finalize())
    }

    /// Writes a JSON document with `inputs_hash` added at the top level.
    pub fn write_json(&mut self, path: &Path, doc: &str) -> Result<(), CliError> {
        let mut v: serde_json::Value = serde_json::from_str(doc).expect("producers emit valid JSON");
        if let serde_json::Value::Object(map) = &mut v {
            map.insert("inputs_hash".into(), self.inputs_hash().into());
        }
        let text = serde_json::to_string_pretty(&v).expect("plain data serializes") + "\n";
        self.write(path, text.as_bytes())
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
        self.outputs.push(FileHash { path: path.to_path_buf(), sha256: sha256_bytes(bytes) });
        log::info!("wrote {}", path.display());
        Ok(())
    }

    pub fn finish(mut self, manifest_path: &Path) -> Result<RunManifest, CliError> {
        let m = RunManifest {
            command: self.cli.command.name().into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            inputs_hash: self.inputs_hash(),
            cli: self.cli.clone(),
            inputs: std::mem::take(&mut self.inputs),
            outputs: std::mem::take(&mut self.outputs),
            wall_time_s: self.start.elapsed().as_secs_f64(),
            stages: std::mem::take(&mut self.stages),
        };
        let text = serde_json::to_string_pretty(&m).expect("plain data serializes") + "\n";
        std::fs::write(manifest_path, text).map_err(|e| CliError::io(manifest_path, e))?;
        Ok(m)
    }
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}
