//! Run manifests: the resolved command, tool version and output digests.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const TOOL: &str = "tdho";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    /// File path, or `-` for standard output.
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

impl OutputDigest {
    pub fn of(path: &str, bytes: &[u8]) -> Self {
        Self { path: path.to_string(), bytes: bytes.len(), sha256: sha256_hex(bytes) }
    }

    pub fn matches(&self, bytes: &[u8]) -> bool {
        self.bytes == bytes.len() && self.sha256 == sha256_hex(bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Every parameter after defaults are applied; enough to rerun the command.
    pub params: serde_json::Value,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn new(subcommand: &str, params: serde_json::Value) -> Self {
        Self {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            params,
            outputs: Vec::new(),
        }
    }

    pub fn record_output(&mut self, path: &str, bytes: &[u8]) {
        self.outputs.push(OutputDigest::of(path, bytes));
    }

    pub fn to_json_bytes(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_bytes()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn json_round_trip() {
        let mut m = RunManifest::new("ermakov", serde_json::json!({"b": 1.0}));
        m.record_output("-", b"t,rho\n");
        let back: RunManifest = serde_json::from_slice(&m.to_json_bytes().unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(back.outputs[0].matches(b"t,rho\n"));
        assert!(!back.outputs[0].matches(b"t,rho"));
    }
}
