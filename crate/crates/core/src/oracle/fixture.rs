use std::collections::HashMap;
use std::path::Path;

use super::cache::read_records;
use super::{OracleError, OracleQuery, OracleResponse, SearchBackend};

/// Read-only backend answering from a fixed table of responses, typically
/// loaded from a cache file. Unknown queries fail as unavailable.
#[derive(Debug, Clone, Default)]
pub struct FixtureBackend {
    entries: HashMap<String, OracleResponse>,
}

impl FixtureBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, OracleError> {
        let (entries, _) =
            read_records(path.as_ref()).map_err(|e| OracleError::Setup(e.to_string()))?;
        Ok(FixtureBackend { entries })
    }

    pub fn insert(&mut self, query: &OracleQuery, response: OracleResponse) {
        self.entries.insert(query.cache_key(), response);
    }

    pub fn with(mut self, query: &OracleQuery, response: OracleResponse) -> Self {
        self.insert(query, response);
        self
    }

    pub fn with_count(self, query: &OracleQuery, count: u64) -> Self {
        self.with(query, OracleResponse::Count(count))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Copy with every count multiplied by `factor`; snippets unchanged.
    pub fn scaled(&self, factor: u64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| {
                let v = match v {
                    OracleResponse::Count(n) => OracleResponse::Count(n * factor),
                    other => other.clone(),
                };
                (k.clone(), v)
            })
            .collect();
        FixtureBackend { entries }
    }
}

impl SearchBackend for FixtureBackend {
    fn name(&self) -> &'static str {
        "fixture"
    }

    fn execute(&self, query: &OracleQuery) -> Result<OracleResponse, OracleError> {
        self.entries
            .get(&query.cache_key())
            .cloned()
            .ok_or_else(|| OracleError::Unavailable(format!("no fixture entry for {query}")))
    }
}
