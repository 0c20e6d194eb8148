//! Persistent JSON store of finished counts.
//!
//! ```json
//! {"version":1,"entries":[{"n":10,"k":3,"parity":"any","prefix":[],"count":"1066"}]}
//! ```
//!
//! Single writer. Every `put` rewrites the whole document through a
//! temporary file and a rename.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{CountQuery, CountRecord};
use crate::apcore::{ApConstraint, Parity, Seq};
use crate::error::{ApError, Result};

pub const CACHE_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    n: usize,
    k: usize,
    parity: Parity,
    prefix: Vec<i64>,
    count: String,
}

#[derive(Serialize, Deserialize)]
struct Document {
    version: u64,
    entries: Vec<serde_json::Value>,
}

#[derive(Debug)]
pub struct CountCache {
    path: PathBuf,
    entries: Vec<(CountQuery, BigUint)>,
}

fn format_err(location: impl Into<String>, message: impl Into<String>) -> ApError {
    ApError::Format {
        location: location.into(),
        message: message.into(),
    }
}

fn describe(q: &CountQuery) -> String {
    format!(
        "n={} k={} parity={} prefix=[{}]",
        q.n(),
        q.constraint().k(),
        q.constraint().parity(),
        q.prefix()
    )
}

impl CountCache {
    /// Loads the cache at `path`; a missing file is an empty cache.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Ok(CountCache {
                    path,
                    entries: Vec::new(),
                })
            }
            Err(e) => return Err(e.into()),
        };
        let where_ = path.display().to_string();
        let doc: Document =
            serde_json::from_str(&text).map_err(|e| format_err(&where_, e.to_string()))?;
        if doc.version != CACHE_VERSION {
            return Err(format_err(
                &where_,
                format!("unsupported version {} (expected {CACHE_VERSION})", doc.version),
            ));
        }
        let mut cache = CountCache {
            path,
            entries: Vec::with_capacity(doc.entries.len()),
        };
        for (i, raw) in doc.entries.into_iter().enumerate() {
            let loc = format!("{where_} entries[{i}]");
            let entry: Entry =
                serde_json::from_value(raw).map_err(|e| format_err(&loc, e.to_string()))?;
            let constraint = ApConstraint::new(entry.k, entry.parity)
                .map_err(|e| format_err(&loc, e.to_string()))?;
            let prefix = Seq::new(entry.prefix).map_err(|e| format_err(&loc, e.to_string()))?;
            let query = CountQuery::new(entry.n, constraint, prefix)
                .map_err(|e| format_err(&loc, e.to_string()))?;
            let count = entry
                .count
                .parse::<BigUint>()
                .map_err(|e| format_err(&loc, format!("count {:?}: {e}", entry.count)))?;
            match cache.lookup(&query) {
                Some(stored) if *stored != count => {
                    return Err(format_err(
                        &loc,
                        format!("duplicate entry for {} disagrees ({stored} vs {count})", describe(&query)),
                    ))
                }
                Some(_) => {}
                None => cache.entries.push((query, count)),
            }
        }
        Ok(cache)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn lookup(&self, q: &CountQuery) -> Option<&BigUint> {
        self.entries.iter().find(|(k, _)| k == q).map(|(_, c)| c)
    }

    /// Cached records carry no search diagnostics: zero nodes, zero time.
    pub fn get(&self, q: &CountQuery) -> Option<CountRecord> {
        self.lookup(q).map(|count| CountRecord {
            query: q.clone(),
            count: count.clone(),
            node_count: 0,
            elapsed: Duration::ZERO,
        })
    }

    /// Stores a record and persists the file. Re-storing an equal count is
    /// a no-op; a different count is a conflict.
    pub fn put(&mut self, record: &CountRecord) -> Result<()> {
        match self.lookup(&record.query) {
            Some(stored) if *stored == record.count => return Ok(()),
            Some(stored) => {
                return Err(ApError::Conflict {
                    query: describe(&record.query),
                    stored: stored.to_string(),
                    new: record.count.to_string(),
                })
            }
            None => {}
        }
        self.entries.push((record.query.clone(), record.count.clone()));
        self.save()
    }

    fn save(&self) -> Result<()> {
        let entries = self
            .entries
            .iter()
            .map(|(q, count)| {
                serde_json::to_value(Entry {
                    n: q.n(),
                    k: q.constraint().k(),
                    parity: q.constraint().parity(),
                    prefix: q.prefix().values().to_vec(),
                    count: count.to_string(),
                })
                .expect("entry serializes")
            })
            .collect();
        let doc = Document {
            version: CACHE_VERSION,
            entries,
        };
        let text = serde_json::to_string_pretty(&doc).expect("document serializes");
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let tmp = self.path.with_extension("tmp");
        fs::write(&tmp, text + "\n")?;
        fs::rename(&tmp, &self.path)?;
        Ok(())
    }
}
