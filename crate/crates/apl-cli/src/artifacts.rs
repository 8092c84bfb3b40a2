//! Output directory with a single digest manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::exit::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Tool version, subcommand, parameters, digests and wall time.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub seed: u64,
    pub workers: usize,
    pub parameters: serde_json::Value,
    pub results: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<InputDigest>,
    pub outputs: BTreeMap<String, String>,
    pub wall_time_s: f64,
}

pub struct ArtifactDir {
    root: PathBuf,
    outputs: BTreeMap<String, String>,
    inputs: Vec<InputDigest>,
}

pub const MANIFEST: &str = "manifest.json";

impl ArtifactDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), outputs: BTreeMap::new(), inputs: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
        }
        std::fs::write(&path, bytes).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn record_input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        Ok(())
    }

    pub fn finish(mut self, mut manifest: RunManifest) -> Result<(), CliError> {
        manifest.outputs = std::mem::take(&mut self.outputs);
        manifest.inputs = std::mem::take(&mut self.inputs);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let path = self.root.join(MANIFEST);
        std::fs::write(&path, text + "\n").map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
    }
}
