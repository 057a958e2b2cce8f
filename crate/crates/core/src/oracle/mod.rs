//! Search oracle: exact-phrase hit counts, snippets, pair-document counts and
//! language-restricted snippets behind a persistent cache.
//!
//! A [`SearchOracle`] wraps one [`SearchBackend`] (HTTP search API, local
//! inverted index, or a read-only fixture) with a [`ResponseCache`]. Identical
//! concurrent queries are issued to the backend once, and backend calls are
//! bounded by a permit count. With no backend (offline mode) every cache miss
//! is an error.

mod cache;
mod fixture;
mod http;
mod local;
mod query;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex, OnceLock};

use thiserror::Error;

pub use cache::{compact, parse_record, read_records, LoadStats, ResponseCache};
pub use fixture::FixtureBackend;
pub use http::{HttpBackend, HttpConfig};
pub use local::{IndexedDocument, LocalIndex};
pub use query::{normalize_phrase, OracleQuery, OracleResponse, PhraseSet, QueryKind, Snippet};

#[derive(Debug, Clone, Error)]
pub enum OracleError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("offline and not cached: {0}")]
    Offline(String),
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("backend returned an unexpected response for {0}")]
    UnexpectedResponse(String),
    #[error("cache write failed: {0}")]
    Cache(String),
    #[error("backend setup failed: {0}")]
    Setup(String),
}

impl OracleError {
    /// Errors that may go away on a later run (as opposed to malformed queries).
    pub fn is_retriable(&self) -> bool {
        !matches!(self, OracleError::InvalidQuery(_) | OracleError::Setup(_))
    }
}

pub trait SearchBackend: Send + Sync {
    /// Short backend identifier reported alongside results.
    fn name(&self) -> &'static str;
    fn execute(&self, query: &OracleQuery) -> Result<OracleResponse, OracleError>;
}

struct Permits {
    available: Mutex<usize>,
    freed: Condvar,
}

impl Permits {
    fn new(n: usize) -> Self {
        Permits {
            available: Mutex::new(n.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> PermitGuard<'_> {
        let mut n = self.available.lock().unwrap();
        while *n == 0 {
            n = self.freed.wait(n).unwrap();
        }
        *n -= 1;
        PermitGuard(self)
    }
}

struct PermitGuard<'a>(&'a Permits);

impl Drop for PermitGuard<'_> {
    fn drop(&mut self) {
        *self.0.available.lock().unwrap() += 1;
        self.0.freed.notify_one();
    }
}

type Flight = Arc<OnceLock<Result<OracleResponse, OracleError>>>;

pub struct SearchOracle {
    backend: Option<Box<dyn SearchBackend>>,
    cache: ResponseCache,
    in_flight: Mutex<HashMap<String, Flight>>,
    permits: Permits,
    backend_calls: AtomicU64,
}

pub const DEFAULT_PARALLELISM: usize = 4;

impl SearchOracle {
    pub fn new(backend: Box<dyn SearchBackend>, cache: ResponseCache) -> Self {
        Self::build(Some(backend), cache)
    }

    /// Cache-only oracle: never contacts a backend.
    pub fn offline(cache: ResponseCache) -> Self {
        Self::build(None, cache)
    }

    fn build(backend: Option<Box<dyn SearchBackend>>, cache: ResponseCache) -> Self {
        SearchOracle {
            backend,
            cache,
            in_flight: Mutex::new(HashMap::new()),
            permits: Permits::new(DEFAULT_PARALLELISM),
            backend_calls: AtomicU64::new(0),
        }
    }

    /// Maximum number of backend requests in flight at once.
    pub fn with_parallelism(mut self, n: usize) -> Self {
        self.permits = Permits::new(n);
        self
    }

    pub fn backend_name(&self) -> &'static str {
        self.backend.as_ref().map_or("offline", |b| b.name())
    }

    pub fn is_offline(&self) -> bool {
        self.backend.is_none()
    }

    /// Number of queries that reached the backend.
    pub fn backend_calls(&self) -> u64 {
        self.backend_calls.load(Ordering::SeqCst)
    }

    pub fn cache(&self) -> &ResponseCache {
        &self.cache
    }

    pub fn execute(&self, query: &OracleQuery) -> Result<OracleResponse, OracleError> {
        query.validate()?;
        let key = query.cache_key();
        if let Some(hit) = self.cache.get_key(&key) {
            return Ok(hit);
        }
        let Some(backend) = &self.backend else {
            return Err(OracleError::Offline(query.to_string()));
        };

        let flight = {
            let mut map = self.in_flight.lock().unwrap();
            map.entry(key.clone()).or_default().clone()
        };
        let result = flight
            .get_or_init(|| {
                // another caller may have finished this query since our cache check
                if let Some(hit) = self.cache.get_key(&key) {
                    return Ok(hit);
                }
                let _permit = self.permits.acquire();
                self.backend_calls.fetch_add(1, Ordering::SeqCst);
                let response = backend.execute(query)?;
                self.cache
                    .put(query, &response)
                    .map_err(|e| OracleError::Cache(e.to_string()))?;
                Ok(response)
            })
            .clone();
        {
            let mut map = self.in_flight.lock().unwrap();
            if map.get(&key).is_some_and(|f| Arc::ptr_eq(f, &flight)) {
                map.remove(&key);
            }
        }
        result
    }

    pub fn count(&self, query: &OracleQuery) -> Result<u64, OracleError> {
        match self.execute(query)? {
            OracleResponse::Count(n) => Ok(n),
            OracleResponse::Snippets(_) => Err(OracleError::UnexpectedResponse(query.to_string())),
        }
    }

    /// Exact-phrase hit count (OR-sets count the disjunction).
    pub fn phrase_count(&self, phrases: PhraseSet) -> Result<u64, OracleError> {
        self.count(&OracleQuery::count_of(phrases))
    }

    pub fn pair_count(&self, a: &str, b: &str) -> Result<u64, OracleError> {
        self.count(&OracleQuery::pair_count(a, b))
    }

    pub fn fetch_snippets(&self, query: &OracleQuery) -> Result<Vec<Snippet>, OracleError> {
        if !query.kind.is_snippet_kind() {
            return Err(OracleError::InvalidQuery(format!(
                "not a snippet query: {query}"
            )));
        }
        match self.execute(query)? {
            OracleResponse::Snippets(mut s) => {
                s.truncate(query.limit.unwrap_or(usize::MAX));
                Ok(s)
            }
            OracleResponse::Count(_) => Err(OracleError::UnexpectedResponse(query.to_string())),
        }
    }
}
