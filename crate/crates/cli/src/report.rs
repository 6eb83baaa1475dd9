//! Report envelopes and output helpers.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every JSON report carries the tool version and the hash of its inputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub body: T,
}

impl<T> Envelope<T> {
    pub fn new(command: &str, config_hash: String, body: T) -> Self {
        Self { tool: "kend".into(), version: VERSION.into(), command: command.into(), config_hash, body }
    }
}

/// SHA-256 of the canonical JSON form of command parameters.
pub fn hash_of<T: Serialize>(params: &T) -> String {
    let canon = serde_json::to_string(params).expect("parameters serialise");
    Sha256::digest(canon.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", d.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Pretty JSON to `dir/name`, or to stdout when no directory is given.
pub fn write_json<T: Serialize>(dir: Option<&Path>, name: &str, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serialises") + "\n";
    match dir {
        Some(d) => write_file(&d.join(name), &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
