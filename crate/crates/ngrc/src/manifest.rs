//! Output directories with a hash manifest.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.txt";

/// Collects artifacts written under one directory.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    artifacts: Vec<(String, String)>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes `bytes` to `name` and records its hash.
    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.path(name);
        let bytes = bytes.as_ref();
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.artifacts.retain(|(n, _)| n != name);
        self.artifacts.push((name.to_string(), sha256_hex(bytes)));
        Ok(path)
    }

    /// Writes `manifest.txt`: one `sha256  name` line per artifact, sorted by name.
    pub fn finish(mut self) -> Result<PathBuf> {
        self.artifacts.sort();
        let body: String = self.artifacts.iter().map(|(n, h)| format!("{h}  {n}\n")).collect();
        let path = self.path(MANIFEST_NAME);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
