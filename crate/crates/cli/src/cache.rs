//! Content-addressed result cache under `<out>/.cache`.
//!
//! The key hashes the tool version, the subcommand and the resolved run
//! configuration. Entries carry no timestamps; the wall-clock time of the run
//! goes to a sidecar so that entries for equal inputs are byte-identical.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord<T> {
    pub tool_version: String,
    pub command: String,
    pub key: String,
    pub config: RunConfig,
    pub payload: T,
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    created_unix: u64,
    elapsed_s: f64,
}

pub fn cache_key(command: &str, cfg: &RunConfig) -> Result<String> {
    let body = serde_json::to_vec(&(TOOL_VERSION, command, cfg))?;
    Ok(hex::encode(Sha256::digest(&body)))
}

pub struct Cache {
    dir: PathBuf,
}

pub enum Lookup<T> {
    Hit(Box<RunRecord<T>>),
    Miss,
}

impl Cache {
    pub fn new(out: &Path) -> Self {
        Self { dir: out.join(".cache") }
    }

    fn entry(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Missing entries are a miss. Unreadable or mismatching entries are reported
    /// and treated as a miss, so the caller recomputes and overwrites them.
    pub fn load<T: DeserializeOwned>(&self, command: &str, cfg: &RunConfig) -> Result<Lookup<T>> {
        let key = cache_key(command, cfg)?;
        let path = self.entry(&key);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Lookup::Miss),
            Err(e) => {
                log::warn!("cache entry {} unreadable ({e}); recomputing", path.display());
                return Ok(Lookup::Miss);
            }
        };
        match serde_json::from_slice::<RunRecord<T>>(&bytes) {
            Ok(r) if r.key == key && r.command == command && r.tool_version == TOOL_VERSION && &r.config == cfg => Ok(Lookup::Hit(Box::new(r))),
            Ok(_) => {
                log::warn!("cache entry {} does not match its key; recomputing", path.display());
                Ok(Lookup::Miss)
            }
            Err(e) => {
                log::warn!("cache entry {} is corrupt ({e}); recomputing", path.display());
                Ok(Lookup::Miss)
            }
        }
    }

    pub fn store<T: Serialize + DeserializeOwned>(&self, command: &str, cfg: &RunConfig, payload: T, elapsed_s: f64) -> Result<RunRecord<T>> {
        std::fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let key = cache_key(command, cfg)?;
        let record = RunRecord { tool_version: TOOL_VERSION.into(), command: command.into(), key: key.clone(), config: cfg.clone(), payload };
        let body = serde_json::to_vec_pretty(&record)?;
        if let Err(e) = serde_json::from_slice::<RunRecord<T>>(&body) {
            log::warn!("result does not survive a JSON round trip ({e}); not cached");
            return Ok(record);
        }
        let path = self.entry(&key);
        // Write then rename, so an interrupted run never leaves a truncated entry.
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, body)?;
        std::fs::rename(&tmp, &path)?;
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        std::fs::write(self.dir.join(format!("{key}.meta.json")), serde_json::to_vec_pretty(&Meta { created_unix, elapsed_s })?)?;
        Ok(record)
    }
}
