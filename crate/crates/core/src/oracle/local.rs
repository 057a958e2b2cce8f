//! In-process inverted index over a language-tagged document collection.
//!
//! Counts are exact document counts rather than engine estimates. Documents
//! are ranked in collection order.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use super::{OracleError, OracleQuery, OracleResponse, PhraseSet, QueryKind, SearchBackend, Snippet};
use crate::text::{token_spans, tokenize};

/// Tokens shown on each side of the first match in a snippet.
const SNIPPET_CONTEXT: usize = 12;

#[derive(Debug, Clone)]
pub struct IndexedDocument {
    pub id: String,
    pub lang: String,
    pub text: String,
    tokens: Vec<String>,
    spans: Vec<(usize, usize)>,
}

impl IndexedDocument {
    pub fn new(id: impl Into<String>, lang: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let spans = token_spans(&text);
        let tokens = spans
            .iter()
            .map(|&(s, e)| text[s..e].to_lowercase())
            .collect();
        IndexedDocument {
            id: id.into(),
            lang: lang.into(),
            text,
            tokens,
            spans,
        }
    }

    /// Token positions where `phrase` starts.
    fn matches(&self, phrase: &[String]) -> Vec<usize> {
        if phrase.is_empty() || phrase.len() > self.tokens.len() {
            return Vec::new();
        }
        self.tokens
            .windows(phrase.len())
            .enumerate()
            .filter(|(_, w)| *w == phrase)
            .map(|(i, _)| i)
            .collect()
    }

    fn snippet_at(&self, start: usize, len: usize) -> String {
        let first = start.saturating_sub(SNIPPET_CONTEXT);
        let last = (start + len + SNIPPET_CONTEXT).min(self.tokens.len()) - 1;
        self.text[self.spans[first].0..self.spans[last].1].to_string()
    }
}

#[derive(Debug, Default)]
pub struct LocalIndex {
    docs: Vec<IndexedDocument>,
    postings: HashMap<String, Vec<usize>>,
}

impl LocalIndex {
    pub fn new(docs: Vec<IndexedDocument>) -> Self {
        let mut postings: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, doc) in docs.iter().enumerate() {
            let unique: BTreeSet<&String> = doc.tokens.iter().collect();
            for tok in unique {
                postings.entry(tok.clone()).or_default().push(i);
            }
        }
        LocalIndex { docs, postings }
    }

    /// Reads `id<TAB>lang<TAB>text` lines.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, OracleError> {
        let mut docs = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| OracleError::Setup(e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(3, '\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(id), Some(lang), Some(text)) if !lang.is_empty() => {
                    docs.push(IndexedDocument::new(id, lang, text));
                }
                _ => {
                    return Err(OracleError::Setup(format!(
                        "document line {}: expected id<TAB>lang<TAB>text",
                        idx + 1
                    )))
                }
            }
        }
        Ok(Self::new(docs))
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Sorted indices of documents containing at least one alternative.
    fn docs_matching(&self, set: &PhraseSet) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for phrase in set.alternatives() {
            let toks = tokenize(phrase);
            let Some(first) = toks.first() else { continue };
            let Some(candidates) = self.postings.get(first) else {
                continue;
            };
            out.extend(
                candidates
                    .iter()
                    .copied()
                    .filter(|&d| !self.docs[d].matches(&toks).is_empty()),
            );
        }
        out
    }

    fn snippets(&self, phrase: &str, lang: Option<&str>, limit: usize) -> Vec<Snippet> {
        let toks = tokenize(phrase);
        self.docs_matching(&PhraseSet::single(phrase))
            .into_iter()
            .map(|d| &self.docs[d])
            .filter(|doc| lang.is_none_or(|l| doc.lang == l))
            .take(limit)
            .map(|doc| {
                let start = doc.matches(&toks)[0];
                Snippet {
                    text: doc.snippet_at(start, toks.len()),
                    doc_id: Some(doc.id.clone()),
                }
            })
            .collect()
    }
}

impl SearchBackend for LocalIndex {
    fn name(&self) -> &'static str {
        "local"
    }

    fn execute(&self, query: &OracleQuery) -> Result<OracleResponse, OracleError> {
        query.validate()?;
        let response = match query.kind {
            QueryKind::PhraseCount => {
                OracleResponse::Count(self.docs_matching(&query.phrases[0]).len() as u64)
            }
            QueryKind::PairCount => {
                let a = self.docs_matching(&query.phrases[0]);
                let b = self.docs_matching(&query.phrases[1]);
                OracleResponse::Count(a.intersection(&b).count() as u64)
            }
            QueryKind::Snippets | QueryKind::MixedSnippets => {
                let phrase = &query.phrases[0].alternatives()[0];
                OracleResponse::Snippets(self.snippets(
                    phrase,
                    query.lang.as_deref(),
                    query.limit.unwrap_or(usize::MAX),
                ))
            }
        };
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn index() -> LocalIndex {
        LocalIndex::new(vec![
            IndexedDocument::new("1", "fr", "La caisse centrale et le central fund."),
            IndexedDocument::new("2", "en", "Recipe: souris d'agneau, or lamb shank, slow cooked."),
            IndexedDocument::new("3", "en", "The central fund of the caisse centrale."),
            IndexedDocument::new("4", "fr", "Une caisse claire."),
        ])
    }

    fn count(idx: &LocalIndex, q: OracleQuery) -> u64 {
        match idx.execute(&q).unwrap() {
            OracleResponse::Count(n) => n,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn phrase_and_pair_counts_are_document_counts() {
        let idx = index();
        assert_eq!(count(&idx, OracleQuery::phrase_count("caisse centrale")), 2);
        assert_eq!(count(&idx, OracleQuery::phrase_count("centrale caisse")), 0);
        assert_eq!(count(&idx, OracleQuery::phrase_count("unindexed phrase")), 0);
        assert_eq!(
            count(&idx, OracleQuery::pair_count("caisse centrale", "central fund")),
            2
        );
        assert_eq!(
            count(&idx, OracleQuery::pair_count("caisse claire", "lamb shank")),
            0
        );
        let or = OracleQuery::count_of(PhraseSet::any_of(["caisse claire", "caisse centrale"]));
        assert_eq!(count(&idx, or), 3);
    }

    #[test]
    fn mixed_snippets_filter_by_language() {
        let idx = index();
        let q = OracleQuery::mixed_snippets("souris d'agneau", "en", 10);
        let OracleResponse::Snippets(s) = idx.execute(&q).unwrap() else {
            panic!()
        };
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].doc_id.as_deref(), Some("2"));
        assert!(s[0].text.contains("souris d'agneau"));

        let q = OracleQuery::snippets("caisse centrale", Some("fr"), 10);
        let OracleResponse::Snippets(s) = idx.execute(&q).unwrap() else {
            panic!()
        };
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn snippet_limit_truncates() {
        let docs = (0..40)
            .map(|i| IndexedDocument::new(i.to_string(), "en", "a retirement fund story"))
            .collect();
        let idx = LocalIndex::new(docs);
        let OracleResponse::Snippets(s) = idx
            .execute(&OracleQuery::snippets("retirement fund", None, 1000))
            .unwrap()
        else {
            panic!()
        };
        assert_eq!(s.len(), 40);
    }

    #[test]
    fn parse_documents() {
        let idx = LocalIndex::parse("d1\ten\thello world\n\n# c\nd2\tfr\tbonjour\n".as_bytes()).unwrap();
        assert_eq!(idx.len(), 2);
        assert!(LocalIndex::parse("d1 en hello\n".as_bytes()).is_err());
    }
}
