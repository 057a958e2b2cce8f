//! Client for a JSON web-search API.
//!
//! Requests are `GET <endpoint>?q=<query>&count=<n>&offset=<k>[&lang=<code>]`
//! with an optional `Authorization: Bearer <key>` header. The response body
//! must be `{"total": <hits>, "results": [{"snippet": "...", "url": "..."}]}`.
//! Hit counts come from `total`; snippets are paged until the query limit is
//! reached or the engine runs out of results.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use log::{debug, warn};
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::Deserialize;

use super::{OracleError, OracleQuery, OracleResponse, QueryKind, SearchBackend, Snippet};

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub endpoint: String,
    pub api_key: Option<String>,
    /// Maximum requests per second; 0 disables rate limiting.
    pub rate_per_sec: f64,
    pub max_retries: u32,
    /// Delay before the first retry, doubled on each further attempt.
    pub backoff: Duration,
    pub page_size: usize,
    pub timeout: Duration,
}

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpConfig {
            endpoint: endpoint.into(),
            api_key: None,
            rate_per_sec: 1.0,
            max_retries: 3,
            backoff: Duration::from_millis(500),
            page_size: 50,
            timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Debug, Deserialize)]
struct SearchPage {
    total: u64,
    #[serde(default)]
    results: Vec<SearchHit>,
}

#[derive(Debug, Deserialize)]
struct SearchHit {
    snippet: String,
    #[serde(default)]
    url: Option<String>,
}

pub struct HttpBackend {
    client: Client,
    config: HttpConfig,
    last_request: Mutex<Option<Instant>>,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self, OracleError> {
        if config.endpoint.is_empty() {
            return Err(OracleError::Setup("empty search endpoint".into()));
        }
        let client = Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| OracleError::Setup(e.to_string()))?;
        Ok(HttpBackend {
            client,
            config,
            last_request: Mutex::new(None),
        })
    }

    fn throttle(&self) {
        if self.config.rate_per_sec <= 0.0 {
            return;
        }
        let interval = Duration::from_secs_f64(1.0 / self.config.rate_per_sec);
        let mut last = self.last_request.lock().unwrap();
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < interval {
                std::thread::sleep(interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    fn fetch_page(
        &self,
        query: &OracleQuery,
        count: usize,
        offset: usize,
    ) -> Result<SearchPage, OracleError> {
        let text = query.render();
        let mut params = vec![
            ("q", text),
            ("count", count.to_string()),
            ("offset", offset.to_string()),
        ];
        if let Some(lang) = &query.lang {
            params.push(("lang", lang.clone()));
        }

        let mut attempt = 0;
        loop {
            self.throttle();
            let mut req = self.client.get(&self.config.endpoint).query(&params);
            if let Some(key) = &self.config.api_key {
                req = req.bearer_auth(key);
            }
            let outcome = req.send().map_err(|e| e.to_string()).and_then(|resp| {
                let status = resp.status();
                if status.is_success() {
                    resp.text().map_err(|e| e.to_string()).map(Ok)
                } else {
                    Ok(Err(status))
                }
            });
            let failure = match outcome {
                Ok(Ok(body)) => {
                    return serde_json::from_str(&body).map_err(|e| {
                        OracleError::UnexpectedResponse(format!("{query}: {e}"))
                    })
                }
                Ok(Err(status)) if !is_transient(status) => {
                    return Err(OracleError::Unavailable(format!("{query}: HTTP {status}")))
                }
                Ok(Err(status)) => format!("HTTP {status}"),
                Err(transport) => transport,
            };
            if attempt >= self.config.max_retries {
                return Err(OracleError::Unavailable(format!(
                    "{query}: {failure} after {} attempt(s)",
                    attempt + 1
                )));
            }
            let delay = self.config.backoff * 2u32.saturating_pow(attempt);
            warn!("search request failed ({failure}); retrying in {delay:?}");
            std::thread::sleep(delay);
            attempt += 1;
        }
    }
}

fn is_transient(status: StatusCode) -> bool {
    status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error()
}

impl SearchBackend for HttpBackend {
    fn name(&self) -> &'static str {
        "http"
    }

    fn execute(&self, query: &OracleQuery) -> Result<OracleResponse, OracleError> {
        query.validate()?;
        debug!("GET {}", query.render());
        match query.kind {
            QueryKind::PhraseCount | QueryKind::PairCount => {
                let page = self.fetch_page(query, 1, 0)?;
                Ok(OracleResponse::Count(page.total))
            }
            QueryKind::Snippets | QueryKind::MixedSnippets => {
                let limit = query.limit.unwrap_or(usize::MAX);
                let mut snippets = Vec::new();
                let mut offset = 0;
                while snippets.len() < limit {
                    let want = self.config.page_size.min(limit - snippets.len()).max(1);
                    let page = self.fetch_page(query, want, offset)?;
                    let got = page.results.len();
                    offset += got;
                    snippets.extend(
                        page.results
                            .into_iter()
                            .filter(|h| !h.snippet.is_empty())
                            .map(|h| Snippet {
                                text: h.snippet,
                                doc_id: h.url,
                            }),
                    );
                    if got < want {
                        break;
                    }
                }
                snippets.truncate(limit);
                Ok(OracleResponse::Snippets(snippets))
            }
        }
    }
}
