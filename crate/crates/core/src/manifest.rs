//! Run manifests: the configuration of a command plus SHA-256 digests of
//! every file it read or wrote.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::csi_data::write_atomic;
use crate::error::Result;

pub const MANIFEST_VERSION: &str = "manifest v1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl ManifestFile {
    /// Digest of the file at `path`, recorded under `name`.
    pub fn hash(path: impl AsRef<Path>, name: impl Into<String>) -> Result<Self> {
        let path = path.as_ref();
        let hash = || -> Result<(String, u64)> {
            let mut r = BufReader::new(File::open(path)?);
            let mut h = Sha256::new();
            let mut buf = [0u8; 1 << 16];
            let mut total = 0u64;
            loop {
                let n = r.read(&mut buf)?;
                if n == 0 {
                    break;
                }
                total += n as u64;
                h.update(&buf[..n]);
            }
            Ok((hex::encode(h.finalize()), total))
        };
        let (sha256, bytes) = hash().map_err(|e| e.in_file(path))?;
        Ok(ManifestFile {
            path: name.into(),
            sha256,
            bytes,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    #[serde(default)]
    pub inputs: Vec<ManifestFile>,
    pub outputs: Vec<ManifestFile>,
}

impl Manifest {
    pub fn new(command: impl Into<String>, config: serde_json::Value) -> Self {
        Manifest {
            version: MANIFEST_VERSION.into(),
            command: command.into(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path, |w| {
            serde_json::to_writer_pretty(&mut *w, self)?;
            writeln!(w)?;
            Ok(())
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let read = || -> Result<Manifest> { Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?) };
        read().map_err(|e| e.in_file(path))
    }
}
