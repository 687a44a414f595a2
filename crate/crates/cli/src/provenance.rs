//! Config digests embedded in every output file.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub command: String,
    /// SHA-256 of the effective options and the contents of every input file.
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl Provenance {
    /// `options` must already contain every setting that affects the output;
    /// input files contribute their content hash, never their path.
    pub fn new(command: &str, options: Value, inputs: &[&Path], seed: Option<u64>) -> Result<Self, CliError> {
        let mut files = Vec::with_capacity(inputs.len());
        for p in inputs {
            files.push(file_sha256(p)?);
        }
        let canonical = json!({ "command": command, "options": options, "inputs": files, "seed": seed });
        let bytes = serde_json::to_vec(&canonical).expect("json value serializes");
        Ok(Self {
            tool: format!("auricle {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            config_sha256: hex::encode(Sha256::digest(&bytes)),
            seed,
        })
    }

    /// Lines for text formats that only carry comments.
    pub fn comment_lines(&self) -> Vec<String> {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        vec![
            format!("{} {}", self.tool, self.command),
            format!("config_sha256 {}", self.config_sha256),
            format!("seed {seed}"),
        ]
    }
}

pub fn file_sha256(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
