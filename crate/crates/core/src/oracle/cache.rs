//! Append-only response cache.
//!
//! One record per line: `<canonical query json><TAB><response json>`. When a
//! key appears more than once the last record wins. Unparseable lines are
//! skipped with a warning so the query gets re-issued.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use log::warn;

use super::{OracleQuery, OracleResponse};

#[derive(Debug, Default)]
pub struct LoadStats {
    pub records: usize,
    pub skipped: usize,
}

pub struct ResponseCache {
    entries: RwLock<HashMap<String, OracleResponse>>,
    writer: Option<Mutex<BufWriter<File>>>,
    path: Option<PathBuf>,
}

impl ResponseCache {
    pub fn in_memory() -> Self {
        ResponseCache {
            entries: RwLock::new(HashMap::new()),
            writer: None,
            path: None,
        }
    }

    /// Loads `path` if it exists and appends new records to it.
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref();
        let (entries, stats) = if path.exists() {
            read_records(path)?
        } else {
            (HashMap::new(), LoadStats::default())
        };
        if stats.skipped > 0 {
            warn!(
                "{}: skipped {} corrupt cache record(s)",
                path.display(),
                stats.skipped
            );
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(ResponseCache {
            entries: RwLock::new(entries),
            writer: Some(Mutex::new(BufWriter::new(file))),
            path: Some(path.to_path_buf()),
        })
    }

    /// Loads `path` without ever writing to it.
    pub fn open_read_only(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let (entries, _) = read_records(path.as_ref())?;
        Ok(ResponseCache {
            entries: RwLock::new(entries),
            writer: None,
            path: Some(path.as_ref().to_path_buf()),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, query: &OracleQuery) -> Option<OracleResponse> {
        self.get_key(&query.cache_key())
    }

    pub fn get_key(&self, key: &str) -> Option<OracleResponse> {
        self.entries.read().unwrap().get(key).cloned()
    }

    pub fn put(&self, query: &OracleQuery, response: &OracleResponse) -> std::io::Result<()> {
        let key = query.cache_key();
        if let Some(writer) = &self.writer {
            let mut w = writer.lock().unwrap();
            writeln!(w, "{key}\t{}", response.to_payload())?;
            w.flush()?;
        }
        self.entries.write().unwrap().insert(key, response.clone());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Snapshot of all entries, ordered by key.
    pub fn snapshot(&self) -> BTreeMap<String, OracleResponse> {
        self.entries
            .read()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

/// Parses one cache line into its key and response.
pub fn parse_record(line: &str) -> Option<(String, OracleResponse)> {
    let (key, payload) = line.split_once('\t')?;
    // re-canonicalize so hand-written files with unsorted phrases still hit
    let query = OracleQuery::from_cache_key(key)?;
    let response: OracleResponse = serde_json::from_str(payload).ok()?;
    Some((query.cache_key(), response))
}

pub fn read_records(path: &Path) -> std::io::Result<(HashMap<String, OracleResponse>, LoadStats)> {
    let reader = BufReader::new(File::open(path)?);
    let mut entries = HashMap::new();
    let mut stats = LoadStats::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(&line) {
            Some((key, response)) => {
                entries.insert(key, response);
                stats.records += 1;
            }
            None => {
                warn!("{}:{}: unreadable cache record", path.display(), idx + 1);
                stats.skipped += 1;
            }
        }
    }
    Ok((entries, stats))
}

/// Rewrites a cache file with one record per key, sorted by key. Returns the
/// number of records kept.
pub fn compact(path: &Path) -> std::io::Result<usize> {
    let (entries, _) = read_records(path)?;
    let sorted: BTreeMap<_, _> = entries.into_iter().collect();
    let tmp = path.with_extension("compact.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        for (key, response) in &sorted {
            writeln!(w, "{key}\t{}", response.to_payload())?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(sorted.len())
}
