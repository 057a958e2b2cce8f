use std::fmt;

use serde::{Deserialize, Serialize};

use super::OracleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum QueryKind {
    PhraseCount,
    Snippets,
    PairCount,
    MixedSnippets,
}

impl QueryKind {
    pub fn is_snippet_kind(self) -> bool {
        matches!(self, QueryKind::Snippets | QueryKind::MixedSnippets)
    }
}

/// One or more exact phrases joined by OR. A single-element set is a plain
/// exact-phrase query.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhraseSet(Vec<String>);

impl PhraseSet {
    pub fn single(phrase: &str) -> Self {
        PhraseSet(vec![normalize_phrase(phrase)])
    }

    pub fn any_of<I, S>(phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut v: Vec<String> = phrases
            .into_iter()
            .map(|p| normalize_phrase(p.as_ref()))
            .collect();
        let mut seen = std::collections::HashSet::new();
        v.retain(|p| seen.insert(p.clone()));
        PhraseSet(v)
    }

    pub fn alternatives(&self) -> &[String] {
        &self.0
    }

    pub fn is_single(&self) -> bool {
        self.0.len() == 1
    }
}

impl fmt::Display for PhraseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" OR ")?;
            }
            write!(f, "\"{p}\"")?;
        }
        Ok(())
    }
}

/// Trim, collapse inner whitespace and lowercase.
pub fn normalize_phrase(phrase: &str) -> String {
    phrase
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// A search request. Field order here is the field order of the serialized
/// cache key, so it must not change.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OracleQuery {
    pub kind: QueryKind,
    pub phrases: Vec<PhraseSet>,
    pub lang: Option<String>,
    pub limit: Option<usize>,
}

impl OracleQuery {
    pub fn phrase_count(phrase: &str) -> Self {
        Self::count_of(PhraseSet::single(phrase))
    }

    pub fn count_of(set: PhraseSet) -> Self {
        OracleQuery {
            kind: QueryKind::PhraseCount,
            phrases: vec![set],
            lang: None,
            limit: None,
        }
    }

    /// Documents containing both exact phrases.
    pub fn pair_count(a: &str, b: &str) -> Self {
        let phrases = vec![PhraseSet::single(a), PhraseSet::single(b)];
        OracleQuery {
            kind: QueryKind::PairCount,
            phrases,
            lang: None,
            limit: None,
        }
    }

    pub fn snippets(phrase: &str, lang: Option<&str>, limit: usize) -> Self {
        OracleQuery {
            kind: QueryKind::Snippets,
            phrases: vec![PhraseSet::single(phrase)],
            lang: lang.map(str::to_string),
            limit: Some(limit),
        }
    }

    /// Source-language phrase searched only in `lang` pages.
    pub fn mixed_snippets(phrase: &str, lang: &str, limit: usize) -> Self {
        OracleQuery {
            kind: QueryKind::MixedSnippets,
            phrases: vec![PhraseSet::single(phrase)],
            lang: Some(lang.to_string()),
            limit: Some(limit),
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let invalid = |why: &str| Err(OracleError::InvalidQuery(format!("{why}: {self}")));
        let expected = if self.kind == QueryKind::PairCount { 2 } else { 1 };
        if self.phrases.len() != expected {
            return invalid("wrong number of phrases");
        }
        if self
            .phrases
            .iter()
            .any(|s| s.0.is_empty() || s.0.iter().any(String::is_empty))
        {
            return invalid("empty phrase");
        }
        if self.kind.is_snippet_kind() {
            if !self.phrases[0].is_single() {
                return invalid("snippet queries take a single phrase");
            }
            match self.limit {
                None | Some(0) => return invalid("snippet limit must be at least 1"),
                _ => {}
            }
        }
        if self.kind == QueryKind::MixedSnippets && self.lang.is_none() {
            return invalid("mixed snippets need a language restriction");
        }
        Ok(())
    }

    /// Same query with alternatives and phrases sorted, so that `(a, b)` and
    /// `(b, a)` are one query.
    pub fn canonical(&self) -> OracleQuery {
        let mut phrases: Vec<PhraseSet> = self
            .phrases
            .iter()
            .map(|s| {
                let mut alts = s.0.clone();
                alts.sort();
                PhraseSet(alts)
            })
            .collect();
        phrases.sort();
        OracleQuery {
            phrases,
            ..self.clone()
        }
    }

    /// Canonical serialized form used as the cache key.
    pub fn cache_key(&self) -> String {
        serde_json::to_string(&self.canonical()).expect("query serialization cannot fail")
    }

    pub fn from_cache_key(key: &str) -> Option<OracleQuery> {
        serde_json::from_str(key).ok()
    }

    /// Query text in common engine syntax: quoted phrases, `OR` between
    /// alternatives, juxtaposition for conjunction.
    pub fn render(&self) -> String {
        self.phrases
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for OracleQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {}", self.kind, self.render())?;
        if let Some(lang) = &self.lang {
            write!(f, " lang:{lang}")?;
        }
        if let Some(limit) = self.limit {
            write!(f, " limit:{limit}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub text: String,
    pub doc_id: Option<String>,
}

impl Snippet {
    pub fn new(text: impl Into<String>) -> Self {
        Snippet {
            text: text.into(),
            doc_id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleResponse {
    Count(u64),
    Snippets(Vec<Snippet>),
}

impl OracleResponse {
    pub fn to_payload(&self) -> String {
        serde_json::to_string(self).expect("response serialization cannot fail")
    }
}
