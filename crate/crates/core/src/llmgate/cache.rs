//! Append-only JSONL response cache.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CACHE_FILE: &str = "responses.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub response: String,
    pub timestamp: String,
}

#[derive(Debug)]
pub struct Cache {
    path: PathBuf,
    entries: Mutex<HashMap<String, String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CacheStats {
    pub entries: usize,
    pub corrupt_lines: usize,
    pub bytes: u64,
}

fn read_entries(path: &Path) -> Result<(HashMap<String, String>, usize)> {
    let mut map = HashMap::new();
    let mut corrupt = 0;
    if !path.exists() {
        return Ok((map, 0));
    }
    let text = fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CacheEntry>(line) {
            Ok(e) => {
                map.insert(e.key, e.response);
            }
            Err(err) => {
                corrupt += 1;
                log::warn!("{}:{}: ignoring corrupt cache line ({err})", path.display(), i + 1);
            }
        }
    }
    Ok((map, corrupt))
}

impl Cache {
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        let path = dir.join(CACHE_FILE);
        let (entries, _) = read_entries(&path)?;
        Ok(Cache {
            path,
            entries: Mutex::new(entries),
        })
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.entries.lock().expect("cache lock").get(key).cloned()
    }

    /// Records a response in memory and appends it to disk.
    pub fn put(&self, key: &str, response: &str) -> Result<()> {
        let entry = CacheEntry {
            key: key.to_string(),
            response: response.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        };
        let mut line = serde_json::to_string(&entry)?;
        line.push('\n');
        let mut guard = self.entries.lock().expect("cache lock");
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| Error::io(format!("opening {}", self.path.display()), e))?;
        f.write_all(line.as_bytes())
            .map_err(|e| Error::io(format!("writing {}", self.path.display()), e))?;
        guard.insert(entry.key, entry.response);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn stats(dir: &Path) -> Result<CacheStats> {
    let path = dir.join(CACHE_FILE);
    let (map, corrupt_lines) = read_entries(&path)?;
    let bytes = fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    Ok(CacheStats {
        entries: map.len(),
        corrupt_lines,
        bytes,
    })
}

/// Removes the cache file. A missing directory is not an error.
pub fn clear(dir: &Path) -> Result<()> {
    let path = dir.join(CACHE_FILE);
    match fs::remove_file(&path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(Error::io(format!("removing {}", path.display()), e)),
    }
}
