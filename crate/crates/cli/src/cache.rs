//! On-disk result cache: one JSON document, replaced atomically on save.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Default, Serialize, Deserialize)]
struct Document {
    version: String,
    entries: BTreeMap<String, Value>,
}

pub struct ResultCache {
    path: PathBuf,
    doc: Document,
    dirty: bool,
}

/// `group|operation|sha256(params)`. `serde_json` maps keep their keys
/// sorted, so equal parameters serialize identically.
pub fn cache_key(group: &str, operation: &str, params: &Value) -> String {
    let digest = Sha256::digest(params.to_string().as_bytes());
    format!("{group}|{operation}|{}", hex::encode(digest))
}

pub fn default_path() -> PathBuf {
    if let Some(p) = std::env::var_os("ZEROSUM_CACHE") {
        return PathBuf::from(p);
    }
    let base = std::env::var_os("XDG_CACHE_HOME")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")));
    match base {
        Some(dir) => dir.join("zerosum").join("cache.json"),
        None => PathBuf::from(".zerosum-cache.json"),
    }
}

impl ResultCache {
    /// Opens the cache, starting empty when the file is missing, unreadable
    /// or written by another version.
    pub fn open(path: &Path) -> ResultCache {
        let fresh = Document {
            version: zerosum::VERSION.to_string(),
            entries: BTreeMap::new(),
        };
        let doc = match fs::read_to_string(path) {
            Ok(text) => match serde_json::from_str::<Document>(&text) {
                Ok(doc) if doc.version == zerosum::VERSION => doc,
                Ok(doc) => {
                    eprintln!("cache: discarding entries from version {}", doc.version);
                    fresh
                }
                Err(e) => {
                    eprintln!("cache: ignoring unreadable {}: {e}", path.display());
                    fresh
                }
            },
            Err(_) => fresh,
        };
        ResultCache {
            path: path.to_path_buf(),
            doc,
            dirty: false,
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.doc.entries.get(key)
    }

    pub fn insert(&mut self, key: String, value: Value) {
        self.doc.entries.insert(key, value);
        self.dirty = true;
    }

    pub fn invalidate(&mut self, key: &str) {
        if self.doc.entries.remove(key).is_some() {
            self.dirty = true;
        }
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.doc.entries.len()
    }

    /// Writes to a temporary file in the same directory, then renames it over
    /// the cache file.
    pub fn save(&mut self) -> Result<()> {
        if !self.dirty {
            return Ok(());
        }
        let dir = match self.path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        serde_json::to_writer_pretty(&mut tmp, &self.doc)?;
        tmp.write_all(b"\n")?;
        tmp.persist(&self.path)
            .with_context(|| format!("writing {}", self.path.display()))?;
        self.dirty = false;
        Ok(())
    }
}
