use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use mfqvar::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Everything needed to repeat a run: inputs by digest, the resolved
/// settings and the files produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub arguments: BTreeMap<String, serde_json::Value>,
    pub config_digest: Option<String>,
    pub data_digest: Option<String>,
    pub seed: Option<u64>,
    pub files: Vec<FileEntry>,
}

pub(crate) fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

impl Manifest {
    pub(crate) fn new(command: &str) -> Self {
        Self {
            tool: "mfqvar".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            arguments: BTreeMap::new(),
            config_digest: None,
            data_digest: None,
            seed: None,
            files: Vec::new(),
        }
    }

    pub(crate) fn arg(&mut self, key: &str, value: impl Serialize) {
        self.arguments.insert(key.into(), serde_json::to_value(value).expect("argument serialises"));
    }

    /// Lists every file under `dir` except the manifest and writes it.
    pub(crate) fn write(mut self, dir: &Path) -> Result<()> {
        let mut files = Vec::new();
        collect(dir, dir, &mut files)?;
        files.sort();
        self.files = files
            .into_iter()
            .map(|rel| {
                let full = dir.join(&rel);
                let bytes = fs::metadata(&full).map_err(|e| Error::Io { path: full.clone(), source: e })?.len();
                Ok(FileEntry { sha256: file_digest(&full)?, path: rel, bytes })
            })
            .collect::<Result<_>>()?;
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self).expect("manifest serialises");
        fs::write(&path, text + "\n").map_err(|e| Error::Io { path, source: e })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::Io { path: dir.into(), source: e })?;
        let path = entry.path();
        if path.is_dir() {
            collect(root, &path, out)?;
        } else if path != root.join("manifest.json") {
            let rel = path.strip_prefix(root).expect("under root");
            out.push(rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"));
        }
    }
    Ok(())
}
