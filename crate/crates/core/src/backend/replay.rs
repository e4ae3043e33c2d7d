//! Record/replay cache: one JSON file per request, named by a content hash.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Backend, BackendError, CompletionRequest};

pub const CACHE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedRequest {
    pub prompt: String,
    pub max_output_tokens: usize,
    pub seed: u64,
    pub model: String,
}

impl CachedRequest {
    pub fn new(req: &CompletionRequest, model: &str) -> Self {
        Self {
            prompt: req.prompt().to_string(),
            max_output_tokens: req.max_output_tokens(),
            seed: req.seed(),
            model: model.to_string(),
        }
    }

    /// Hex SHA-256 over the canonical JSON of the request.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("request serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub schema_version: u32,
    pub hash: String,
    pub request: CachedRequest,
    pub response: String,
}

pub enum ReplayMode {
    /// Misses are errors.
    Strict,
    /// Misses are forwarded to the inner backend and written to the cache.
    Record(Arc<dyn Backend>),
}

pub struct ReplayBackend {
    dir: PathBuf,
    model: String,
    mode: ReplayMode,
    misses: Mutex<BTreeSet<String>>,
    // Serializes cache writes.
    write_lock: Mutex<()>,
}

impl ReplayBackend {
    pub fn strict(dir: impl Into<PathBuf>, model: impl Into<String>) -> Self {
        Self::new(dir, model, ReplayMode::Strict)
    }

    pub fn recording(
        dir: impl Into<PathBuf>,
        model: impl Into<String>,
        inner: Arc<dyn Backend>,
    ) -> Self {
        Self::new(dir, model, ReplayMode::Record(inner))
    }

    fn new(dir: impl Into<PathBuf>, model: impl Into<String>, mode: ReplayMode) -> Self {
        Self {
            dir: dir.into(),
            model: model.into(),
            mode,
            misses: Mutex::new(BTreeSet::new()),
            write_lock: Mutex::new(()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Hashes of every request that missed in strict mode so far.
    pub fn misses(&self) -> Vec<String> {
        self.misses
            .lock()
            .expect("miss set")
            .iter()
            .cloned()
            .collect()
    }

    pub fn entry_path(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.json"))
    }

    pub fn lookup(&self, req: &CachedRequest) -> Result<Option<CacheEntry>, BackendError> {
        let hash = req.hash();
        let path = self.entry_path(&hash);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(BackendError::Io(format!("{}: {e}", path.display()))),
        };
        let entry: CacheEntry = serde_json::from_str(&text)
            .map_err(|e| BackendError::Decode(format!("{}: {e}", path.display())))?;
        if entry.request != *req {
            return Err(BackendError::Decode(format!(
                "{} holds a different request than its name says",
                path.display()
            )));
        }
        Ok(Some(entry))
    }

    fn store(&self, req: CachedRequest, response: &str) -> Result<(), BackendError> {
        let _guard = self.write_lock.lock().expect("write lock");
        fs::create_dir_all(&self.dir)
            .map_err(|e| BackendError::Io(format!("{}: {e}", self.dir.display())))?;
        let hash = req.hash();
        let entry = CacheEntry {
            schema_version: CACHE_SCHEMA_VERSION,
            hash: hash.clone(),
            request: req,
            response: response.to_string(),
        };
        let mut body = serde_json::to_string_pretty(&entry).expect("entry serializes");
        body.push('\n');
        let path = self.entry_path(&hash);
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, body).map_err(|e| BackendError::Io(format!("{}: {e}", tmp.display())))?;
        fs::rename(&tmp, &path).map_err(|e| BackendError::Io(format!("{}: {e}", path.display())))
    }
}

impl Backend for ReplayBackend {
    fn name(&self) -> &str {
        match self.mode {
            ReplayMode::Strict => "replay",
            ReplayMode::Record(_) => "record",
        }
    }

    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
        let key = CachedRequest::new(req, &self.model);
        if let Some(entry) = self.lookup(&key)? {
            return Ok(entry.response);
        }
        match &self.mode {
            ReplayMode::Strict => {
                let hash = key.hash();
                self.misses.lock().expect("miss set").insert(hash.clone());
                Err(BackendError::CacheMiss { hash })
            }
            ReplayMode::Record(inner) => {
                let response = inner.complete(req)?;
                self.store(key, &response)?;
                Ok(response)
            }
        }
    }
}
