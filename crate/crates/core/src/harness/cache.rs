use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{HarnessError, Result};
use crate::modsym::LevelParams;

/// Bumped whenever a cached payload's meaning changes, which orphans old entries.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+cache.1");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CacheKind {
    Space,
    Operator,
    LambdaModule,
}

impl CacheKind {
    fn dir_name(self) -> &'static str {
        match self {
            CacheKind::Space => "spaces",
            CacheKind::Operator => "operators",
            CacheKind::LambdaModule => "lambda-modules",
        }
    }
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    version: &'a str,
    kind: &'a str,
    level: u64,
    params: Option<LevelParams>,
    precision: Option<u32>,
    label: &'a str,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    key: String,
    version: String,
    /// sha256 of the canonical JSON of `payload`
    checksum: String,
    payload: serde_json::Value,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    /// entries that failed their checksum or did not parse
    pub rebuilt: usize,
}

/// Content-addressed JSON store. With no directory every lookup builds.
#[derive(Debug, Default)]
pub struct Cache {
    dir: Option<PathBuf>,
    hits: AtomicUsize,
    misses: AtomicUsize,
    rebuilt: AtomicUsize,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn canonical(value: &serde_json::Value) -> String {
    // serde_json maps are ordered by key, so this is stable
    value.to_string()
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir, ..Self::default() }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            rebuilt: self.rebuilt.load(Ordering::Relaxed),
        }
    }

    pub fn key(kind: CacheKind, level: u64, params: Option<LevelParams>, precision: Option<u32>, label: &str) -> String {
        let material = KeyMaterial { version: CODE_VERSION, kind: kind.dir_name(), level, params, precision, label };
        sha256_hex(serde_json::to_string(&material).expect("key material serializes").as_bytes())
    }

    pub fn path_for(&self, kind: CacheKind, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(kind.dir_name()).join(format!("{key}.json")))
    }

    /// Loads the entry under `key`, or builds, stores and returns it.
    /// Entries whose checksum does not match are rebuilt and overwritten.
    pub fn get_or_build<T, F>(&self, kind: CacheKind, key: &str, build: F) -> Result<T>
    where
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<T>,
    {
        let Some(path) = self.path_for(kind, key) else {
            return build();
        };
        if path.exists() {
            match Self::load(&path, key) {
                Ok(v) => {
                    self.hits.fetch_add(1, Ordering::Relaxed);
                    log::debug!("cache hit {}", path.display());
                    return Ok(v);
                }
                Err(reason) => {
                    self.rebuilt.fetch_add(1, Ordering::Relaxed);
                    log::warn!("discarding cache entry {}: {reason}", path.display());
                }
            }
        } else {
            self.misses.fetch_add(1, Ordering::Relaxed);
        }
        let value = build()?;
        Self::store(&path, key, &value)?;
        Ok(value)
    }

    fn load<T: DeserializeOwned>(path: &Path, key: &str) -> std::result::Result<T, String> {
        let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
        let env: Envelope = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        if env.key != key || env.version != CODE_VERSION {
            return Err("key or version mismatch".into());
        }
        if sha256_hex(canonical(&env.payload).as_bytes()) != env.checksum {
            return Err("checksum mismatch".into());
        }
        serde_json::from_value(env.payload).map_err(|e| e.to_string())
    }

    fn store<T: Serialize>(path: &Path, key: &str, value: &T) -> Result<()> {
        let dir = path.parent().expect("cache paths have a parent");
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let payload = serde_json::to_value(value)?;
        let env = Envelope {
            key: key.to_string(),
            version: CODE_VERSION.to_string(),
            checksum: sha256_hex(canonical(&payload).as_bytes()),
            payload,
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(dir, e))?;
        serde_json::to_writer(&mut tmp, &env)?;
        tmp.flush().map_err(|e| HarnessError::io(path, e))?;
        tmp.persist(path).map_err(|e| HarnessError::io(path, e.error))?;
        Ok(())
    }
}
