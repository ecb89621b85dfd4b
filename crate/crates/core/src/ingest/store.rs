//! Partitioned ndjson corpus store.
//!
//! Layout:
//!
//! ```text
//! <root>/manifest.json
//! <root>/raw/<scope>/<yyyy-mm-dd>.ndjson
//! ```
//!
//! Partitions are keyed by scope and local calendar day. Records inside a
//! partition are ordered by `(created_at, id)`, so the bytes on disk depend
//! only on the set of stored tweets. Writers take an exclusive lock file; any
//! number of readers may open the store.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::calendar::local_date;
use crate::ingest::RawTweet;

const MANIFEST: &str = "manifest.json";
const LOCK: &str = ".lock";
const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("corpus store unavailable at {path}: {reason}")]
    StoreUnavailable { path: PathBuf, reason: String },
    #[error("corpus store is corrupt: {0}")]
    Corrupt(String),
    #[error("corpus store I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionEntry {
    pub scope: String,
    pub date: NaiveDate,
    pub path: String,
    pub count: usize,
    /// Sorted ids stored in this partition.
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub total: usize,
    pub partitions: Vec<PartitionEntry>,
}

type PartitionKey = (String, NaiveDate);

fn partition_rel_path(scope: &str, date: NaiveDate) -> String {
    format!("raw/{scope}/{}.ndjson", date.format("%Y-%m-%d"))
}

/// Read handle on a corpus store directory.
#[derive(Debug, Clone)]
pub struct CorpusStore {
    root: PathBuf,
}

impl CorpusStore {
    /// Open an existing store. A directory without a manifest is an empty store.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        if !root.is_dir() {
            return Err(StoreError::StoreUnavailable {
                path: root,
                reason: "not a directory".into(),
            });
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> Result<Manifest, StoreError> {
        let path = self.root.join(MANIFEST);
        if !path.exists() {
            return Ok(Manifest { version: MANIFEST_VERSION, ..Manifest::default() });
        }
        let bytes = fs::read(&path)?;
        let manifest: Manifest = serde_json::from_slice(&bytes)
            .map_err(|e| StoreError::Corrupt(format!("{MANIFEST}: {e}")))?;
        if manifest.version != MANIFEST_VERSION {
            return Err(StoreError::Corrupt(format!(
                "unsupported manifest version {}",
                manifest.version
            )));
        }
        Ok(manifest)
    }

    pub fn scopes(&self) -> Result<Vec<String>, StoreError> {
        let scopes: BTreeSet<String> =
            self.manifest()?.partitions.into_iter().map(|p| p.scope).collect();
        Ok(scopes.into_iter().collect())
    }

    fn read_partition(&self, entry: &PartitionEntry) -> Result<Vec<RawTweet>, StoreError> {
        let file = File::open(self.root.join(&entry.path))?;
        let mut out = Vec::with_capacity(entry.count);
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let tweet: RawTweet = serde_json::from_str(&line)
                .map_err(|e| StoreError::Corrupt(format!("{}:{}: {e}", entry.path, n + 1)))?;
            out.push(tweet);
        }
        if out.len() != entry.count {
            return Err(StoreError::Corrupt(format!(
                "{} holds {} records, manifest says {}",
                entry.path,
                out.len(),
                entry.count
            )));
        }
        Ok(out)
    }

    /// Every stored tweet, in partition order (scope, date) then `(created_at, id)`.
    pub fn read_all(&self) -> Result<Vec<RawTweet>, StoreError> {
        let manifest = self.manifest()?;
        let mut out = Vec::with_capacity(manifest.total);
        for entry in &manifest.partitions {
            out.extend(self.read_partition(entry)?);
        }
        Ok(out)
    }

    pub fn read_scope(&self, scope: &str) -> Result<Vec<RawTweet>, StoreError> {
        let mut out = Vec::new();
        for entry in self.manifest()?.partitions.iter().filter(|p| p.scope == scope) {
            out.extend(self.read_partition(entry)?);
        }
        Ok(out)
    }

    /// Take the single writer role, creating the directory if needed.
    pub fn writer(root: impl Into<PathBuf>) -> Result<StoreWriter, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| StoreError::StoreUnavailable {
            path: root.clone(),
            reason: e.to_string(),
        })?;
        let lock_path = root.join(LOCK);
        OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&lock_path)
            .map_err(|e| StoreError::StoreUnavailable {
                path: root.clone(),
                reason: if e.kind() == std::io::ErrorKind::AlreadyExists {
                    format!("another writer holds {}", lock_path.display())
                } else {
                    e.to_string()
                },
            })?;
        let store = CorpusStore { root };
        let mut partitions: BTreeMap<PartitionKey, Vec<RawTweet>> = BTreeMap::new();
        let mut ids = HashSet::new();
        let loaded = (|| -> Result<(), StoreError> {
            for entry in store.manifest()?.partitions {
                let tweets = store.read_partition(&entry)?;
                ids.extend(tweets.iter().map(|t| t.id.clone()));
                partitions.insert((entry.scope, entry.date), tweets);
            }
            Ok(())
        })();
        let writer = StoreWriter {
            store,
            lock_path,
            partitions,
            ids,
            dirty: BTreeSet::new(),
        };
        loaded.map(|_| writer)
    }
}

/// Exclusive writer. Changes become visible on [`commit`](StoreWriter::commit);
/// the lock is released on drop.
#[derive(Debug)]
pub struct StoreWriter {
    store: CorpusStore,
    lock_path: PathBuf,
    partitions: BTreeMap<PartitionKey, Vec<RawTweet>>,
    ids: HashSet<String>,
    dirty: BTreeSet<PartitionKey>,
}

impl StoreWriter {
    pub fn contains(&self, id: &str) -> bool {
        self.ids.contains(id)
    }

    /// Insert unless the id is already stored; returns whether it was added.
    pub fn insert(&mut self, tweet: RawTweet) -> bool {
        if self.ids.contains(&tweet.id) {
            return false;
        }
        self.ids.insert(tweet.id.clone());
        let key = (tweet.scope.clone(), local_date(tweet.created_at));
        self.partitions.entry(key.clone()).or_default().push(tweet);
        self.dirty.insert(key);
        true
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Write changed partitions and the manifest.
    pub fn commit(&mut self) -> Result<(), StoreError> {
        for key in std::mem::take(&mut self.dirty) {
            let tweets = self.partitions.get_mut(&key).expect("dirty partition exists");
            tweets.sort_by(|a, b| (a.created_at, &a.id).cmp(&(b.created_at, &b.id)));
            let mut buf = Vec::new();
            for t in tweets.iter() {
                serde_json::to_writer(&mut buf, t).expect("tweet serializes");
                buf.push(b'\n');
            }
            let rel = partition_rel_path(&key.0, key.1);
            write_atomic(&self.store.root.join(rel), &buf)?;
        }

        let partitions = self
            .partitions
            .iter()
            .map(|((scope, date), tweets)| {
                let mut ids: Vec<String> = tweets.iter().map(|t| t.id.clone()).collect();
                ids.sort();
                PartitionEntry {
                    scope: scope.clone(),
                    date: *date,
                    path: partition_rel_path(scope, *date),
                    count: tweets.len(),
                    ids,
                }
            })
            .collect();
        let manifest = Manifest { version: MANIFEST_VERSION, total: self.ids.len(), partitions };
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        bytes.push(b'\n');
        write_atomic(&self.store.root.join(MANIFEST), &bytes)?;
        Ok(())
    }

    pub fn store(&self) -> &CorpusStore {
        &self.store
    }
}

impl Drop for StoreWriter {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock_path);
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), std::io::Error> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}
