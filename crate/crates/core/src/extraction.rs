//! Pattern-based extraction of complex lexical units (CLUs) and their
//! frequency filters.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{Pos, TaggedCorpus, TaggedToken};
use crate::oracle::{OracleError, PhraseSet, SearchOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UlcPattern {
    NounAdj,
    NounDeNoun,
    NounDNoun,
}

impl UlcPattern {
    pub const ALL: [UlcPattern; 3] = [
        UlcPattern::NounAdj,
        UlcPattern::NounDeNoun,
        UlcPattern::NounDNoun,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            UlcPattern::NounAdj => "NOUN_ADJ",
            UlcPattern::NounDeNoun => "NOUN_DE_NOUN",
            UlcPattern::NounDNoun => "NOUN_D_NOUN",
        }
    }

    /// Whether the pattern has a preposition between its two nouns.
    pub fn is_prepositional(self) -> bool {
        !matches!(self, UlcPattern::NounAdj)
    }
}

impl fmt::Display for UlcPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UlcPattern {
    type Err = UlcFileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UlcPattern::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| UlcFileError::Malformed {
                line: 0,
                reason: format!("unknown pattern `{s}`"),
            })
    }
}

/// A source-language complex lexical unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUlc {
    /// The semantic head: the noun, or the first noun of a prepositional pattern.
    pub head_lemma: String,
    pub modifier_lemma: String,
    pub pattern: UlcPattern,
    /// Most frequent lowercased realization in the corpus.
    pub surface: String,
    pub corpus_freq: usize,
    pub oracle_literal_freq: Option<u64>,
    pub oracle_article_freq: Option<u64>,
}

impl SourceUlc {
    pub fn new(head: &str, modifier: &str, pattern: UlcPattern, surface: &str) -> Self {
        SourceUlc {
            head_lemma: head.to_string(),
            modifier_lemma: modifier.to_string(),
            pattern,
            surface: surface.to_lowercase(),
            corpus_freq: 0,
            oracle_literal_freq: None,
            oracle_article_freq: None,
        }
    }

    pub fn key(&self) -> (&str, &str, UlcPattern) {
        (&self.head_lemma, &self.modifier_lemma, self.pattern)
    }

    /// Word tokens of the surface form (`souris d'agneau` -> souris, d, agneau).
    pub fn surface_tokens(&self) -> Vec<String> {
        crate::text::tokenize(&self.surface)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionConfig {
    pub min_corpus_freq: usize,
    pub min_literal_freq: u64,
    pub min_article_freq: u64,
    /// Keep only the N accepted units with the highest literal hit counts.
    pub max_ulcs: Option<usize>,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            min_corpus_freq: 10,
            min_literal_freq: 10_000,
            min_article_freq: 1_000,
            max_ulcs: None,
        }
    }
}

fn is_de(tok: &TaggedToken) -> bool {
    tok.pos == Pos::Prep && tok.surface.to_lowercase() == "de"
}

fn is_d_elided(tok: &TaggedToken) -> bool {
    tok.pos == Pos::Prep && matches!(tok.surface.to_lowercase().as_str(), "d'" | "d’")
}

/// Every pattern match in one sentence, as (key, surface).
pub fn sentence_matches(sentence: &[TaggedToken]) -> Vec<((String, String, UlcPattern), String)> {
    let mut out = Vec::new();
    for (i, tok) in sentence.iter().enumerate() {
        if tok.pos != Pos::Noun {
            continue;
        }
        let head = &tok.surface;
        if let Some(next) = sentence.get(i + 1) {
            if next.pos == Pos::Adj {
                out.push((
                    (tok.lemma.clone(), next.lemma.clone(), UlcPattern::NounAdj),
                    format!("{head} {}", next.surface).to_lowercase(),
                ));
            }
            if let Some(noun) = sentence.get(i + 2).filter(|t| t.pos == Pos::Noun) {
                let hit = if is_de(next) {
                    Some((UlcPattern::NounDeNoun, format!("{head} de {}", noun.surface)))
                } else if is_d_elided(next) {
                    Some((UlcPattern::NounDNoun, format!("{head} d'{}", noun.surface)))
                } else {
                    None
                };
                if let Some((pattern, surface)) = hit {
                    out.push((
                        (tok.lemma.clone(), noun.lemma.clone(), pattern),
                        surface.to_lowercase(),
                    ));
                }
            }
        }
    }
    out
}

/// Contiguous within-sentence pattern matches occurring at least
/// `min_corpus_freq` times, ordered by descending frequency then key.
pub fn extract_ulcs(corpus: &TaggedCorpus, min_corpus_freq: usize) -> Vec<SourceUlc> {
    type Key = (String, String, UlcPattern);
    let mut counts: HashMap<Key, (usize, HashMap<String, usize>)> = HashMap::new();
    for sentence in corpus.sentences() {
        for (key, surface) in sentence_matches(sentence) {
            let entry = counts.entry(key).or_default();
            entry.0 += 1;
            *entry.1.entry(surface).or_default() += 1;
        }
    }

    let mut ulcs: Vec<SourceUlc> = counts
        .into_iter()
        .filter(|(_, (n, _))| *n >= min_corpus_freq)
        .map(|((head, modifier, pattern), (n, surfaces))| {
            let surface = surfaces
                .into_iter()
                .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
                .map(|(s, _)| s)
                .unwrap_or_default();
            SourceUlc {
                corpus_freq: n,
                ..SourceUlc::new(&head, &modifier, pattern, &surface)
            }
        })
        .collect();
    ulcs.sort_by(|a, b| {
        b.corpus_freq
            .cmp(&a.corpus_freq)
            .then_with(|| a.key().cmp(&b.key()))
    });
    ulcs
}

/// Per-pattern totals, one entry per pattern (zero when absent).
pub fn pattern_totals(ulcs: &[SourceUlc]) -> BTreeMap<UlcPattern, usize> {
    let mut totals: BTreeMap<UlcPattern, usize> =
        UlcPattern::ALL.into_iter().map(|p| (p, 0)).collect();
    for u in ulcs {
        *totals.entry(u.pattern).or_default() += 1;
    }
    totals
}

/// Definite and indefinite article forms prefixed to a phrase.
pub fn article_phrases(surface: &str) -> Vec<String> {
    ["le ", "la ", "l'", "les ", "un ", "une "]
        .iter()
        .map(|art| format!("{art}{surface}"))
        .collect()
}

#[derive(Debug, Clone)]
pub enum WebVerdict {
    Accept,
    Reject,
    Unresolved(OracleError),
}

/// Checks the literal and article-preceded hit counts and records both on
/// the unit.
pub fn web_filter_ulc(
    ulc: &mut SourceUlc,
    oracle: &SearchOracle,
    config: &ExtractionConfig,
) -> WebVerdict {
    let literal = match oracle.phrase_count(PhraseSet::single(&ulc.surface)) {
        Ok(n) => n,
        Err(e) => return WebVerdict::Unresolved(e),
    };
    let article = match oracle.phrase_count(PhraseSet::any_of(article_phrases(&ulc.surface))) {
        Ok(n) => n,
        Err(e) => return WebVerdict::Unresolved(e),
    };
    ulc.oracle_literal_freq = Some(literal);
    ulc.oracle_article_freq = Some(article);
    if literal >= config.min_literal_freq && article >= config.min_article_freq {
        WebVerdict::Accept
    } else {
        WebVerdict::Reject
    }
}

#[derive(Debug, Default)]
pub struct FilterOutcome {
    pub accepted: Vec<SourceUlc>,
    pub rejected: Vec<SourceUlc>,
    pub unresolved: Vec<SourceUlc>,
}

/// Runs [`web_filter_ulc`] over all units (in parallel) and applies the
/// `max_ulcs` cap. Input order is preserved within each outcome list.
pub fn filter_ulcs(
    ulcs: Vec<SourceUlc>,
    oracle: &SearchOracle,
    config: &ExtractionConfig,
) -> FilterOutcome {
    let judged: Vec<(SourceUlc, WebVerdict)> = ulcs
        .into_par_iter()
        .map(|mut u| {
            let v = web_filter_ulc(&mut u, oracle, config);
            (u, v)
        })
        .collect();

    let mut out = FilterOutcome::default();
    for (u, v) in judged {
        match v {
            WebVerdict::Accept => out.accepted.push(u),
            WebVerdict::Reject => out.rejected.push(u),
            WebVerdict::Unresolved(e) => {
                log::warn!("{}: {e}", u.surface);
                out.unresolved.push(u);
            }
        }
    }

    if let Some(cap) = config.max_ulcs {
        if out.accepted.len() > cap {
            let mut ranked: Vec<usize> = (0..out.accepted.len()).collect();
            ranked.sort_by_key(|&i| std::cmp::Reverse(out.accepted[i].oracle_literal_freq));
            let mut keep = vec![false; out.accepted.len()];
            for &i in &ranked[..cap] {
                keep[i] = true;
            }
            let mut kept = Vec::with_capacity(cap);
            for (u, k) in std::mem::take(&mut out.accepted).into_iter().zip(keep) {
                if k {
                    kept.push(u);
                } else {
                    out.rejected.push(u);
                }
            }
            out.accepted = kept;
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum UlcFileError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn opt_count(v: Option<u64>) -> String {
    v.map_or_else(|| "-".to_string(), |n| n.to_string())
}

/// Writes `head modifier pattern surface corpus_freq literal_freq article_freq`
/// lines; unknown oracle counts are written as `-`.
pub fn write_ulcs<W: Write>(mut w: W, ulcs: &[SourceUlc]) -> std::io::Result<()> {
    for u in ulcs {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            u.head_lemma,
            u.modifier_lemma,
            u.pattern,
            u.surface,
            u.corpus_freq,
            opt_count(u.oracle_literal_freq),
            opt_count(u.oracle_article_freq)
        )?;
    }
    Ok(())
}

pub fn read_ulcs<R: BufRead>(reader: R) -> Result<Vec<SourceUlc>, UlcFileError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: String| UlcFileError::Malformed {
            line: line_no,
            reason,
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 7 {
            return Err(bad(format!("expected 7 fields, found {}", f.len())));
        }
        let pattern: UlcPattern = f[2].parse().map_err(|e: UlcFileError| bad(e.to_string()))?;
        let corpus_freq = f[4]
            .parse()
            .map_err(|_| bad(format!("bad corpus frequency `{}`", f[4])))?;
        let count = |s: &str| -> Result<Option<u64>, UlcFileError> {
            if s == "-" {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| bad(format!("bad count `{s}`")))
        };
        out.push(SourceUlc {
            corpus_freq,
            oracle_literal_freq: count(f[5])?,
            oracle_article_freq: count(f[6])?,
            ..SourceUlc::new(f[0], f[1], pattern, f[3])
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_tagged_corpus;
    use crate::oracle::{FixtureBackend, OracleQuery, ResponseCache};

    fn corpus(sentence: &str, times: usize) -> TaggedCorpus {
        let mut text = String::new();
        for _ in 0..times {
            for tok in sentence.split_whitespace() {
                let (surface, rest) = tok.split_once('/').unwrap();
                let (pos, lemma) = rest.split_once('/').unwrap_or((rest, surface));
                text.push_str(&format!("{surface}\t{pos}\t{lemma}\n"));
            }
            text.push_str(".\tSENT\t.\n");
        }
        parse_tagged_corpus(text.as_bytes()).unwrap()
    }

    #[test]
    fn de_pattern_repeated_twelve_times() {
        let c = corpus("un/DET l'/DET appareil/NOUN de/PREP chauffage/NOUN neuf/ADJ", 12);
        let ulcs = extract_ulcs(&c, 10);
        let u = ulcs
            .iter()
            .find(|u| u.pattern == UlcPattern::NounDeNoun)
            .unwrap();
        assert_eq!(u.key(), ("appareil", "chauffage", UlcPattern::NounDeNoun));
        assert_eq!(u.surface, "appareil de chauffage");
        assert_eq!(u.corpus_freq, 12);
        // overlapping NOUN de NOUN ADJ also yields the NOUN_ADJ sub-unit
        assert!(ulcs
            .iter()
            .any(|u| u.key() == ("chauffage", "neuf", UlcPattern::NounAdj)));
    }

    #[test]
    fn non_contiguous_adjective_is_ignored() {
        let c = corpus("appareil/NOUN très/ADV grand/ADJ", 20);
        assert!(extract_ulcs(&c, 1).is_empty());
    }

    #[test]
    fn frequency_threshold() {
        let c = corpus("appareil/NOUN d'/PREP/de imagerie/NOUN", 9);
        assert!(extract_ulcs(&c, 10).is_empty());
        let c = corpus("appareil/NOUN d'/PREP/de imagerie/NOUN", 10);
        let ulcs = extract_ulcs(&c, 10);
        assert_eq!(ulcs.len(), 1);
        assert_eq!(ulcs[0].pattern, UlcPattern::NounDNoun);
        assert_eq!(ulcs[0].surface, "appareil d'imagerie");
    }

    #[test]
    fn surface_is_most_frequent_realization() {
        let mut text = String::new();
        for (surf, n) in [("musicales", 2), ("musicale", 3)] {
            for _ in 0..n {
                text.push_str(&format!("ambiances\tNOUN\tambiance\n{surf}\tADJ\tmusical\n\n"));
            }
        }
        let c = parse_tagged_corpus(text.as_bytes()).unwrap();
        let ulcs = extract_ulcs(&c, 5);
        assert_eq!(ulcs[0].surface, "ambiances musicale");
        assert_eq!(ulcs[0].corpus_freq, 5);
    }

    fn oracle_for(surface: &str, literal: u64, article: u64) -> SearchOracle {
        let fixture = FixtureBackend::new()
            .with_count(&OracleQuery::phrase_count(surface), literal)
            .with_count(
                &OracleQuery::count_of(PhraseSet::any_of(article_phrases(surface))),
                article,
            );
        SearchOracle::new(Box::new(fixture), ResponseCache::in_memory())
    }

    #[test]
    fn web_filter_thresholds() {
        let cfg = ExtractionConfig::default();
        let mut u = SourceUlc::new("ambiance", "musical", UlcPattern::NounAdj, "ambiance musicale");
        let o = oracle_for("ambiance musicale", 12_000, 1_500);
        assert!(matches!(web_filter_ulc(&mut u, &o, &cfg), WebVerdict::Accept));
        assert_eq!(u.oracle_literal_freq, Some(12_000));
        assert_eq!(u.oracle_article_freq, Some(1_500));

        let o = oracle_for("ambiance musicale", 9_999, 5_000);
        assert!(matches!(web_filter_ulc(&mut u, &o, &cfg), WebVerdict::Reject));
        let o = oracle_for("ambiance musicale", 10_000, 999);
        assert!(matches!(web_filter_ulc(&mut u, &o, &cfg), WebVerdict::Reject));
    }

    #[test]
    fn oracle_failure_is_unresolved_not_rejected() {
        let cfg = ExtractionConfig::default();
        let o = SearchOracle::offline(ResponseCache::in_memory());
        let u = SourceUlc::new("a", "b", UlcPattern::NounAdj, "a b");
        let out = filter_ulcs(vec![u], &o, &cfg);
        assert_eq!(out.unresolved.len(), 1);
        assert!(out.rejected.is_empty());
    }

    #[test]
    fn cap_keeps_highest_literal_counts() {
        let mut fixture = FixtureBackend::new();
        let mut ulcs = Vec::new();
        for (i, n) in [20_000u64, 50_000, 30_000].iter().enumerate() {
            let s = format!("mot{i} test");
            fixture.insert(&OracleQuery::phrase_count(&s), crate::oracle::OracleResponse::Count(*n));
            fixture.insert(
                &OracleQuery::count_of(PhraseSet::any_of(article_phrases(&s))),
                crate::oracle::OracleResponse::Count(5_000),
            );
            ulcs.push(SourceUlc::new(&format!("mot{i}"), "test", UlcPattern::NounAdj, &s));
        }
        let o = SearchOracle::new(Box::new(fixture), ResponseCache::in_memory());
        let cfg = ExtractionConfig {
            max_ulcs: Some(2),
            ..Default::default()
        };
        let out = filter_ulcs(ulcs, &o, &cfg);
        let kept: Vec<_> = out.accepted.iter().map(|u| u.surface.as_str()).collect();
        assert_eq!(kept, ["mot1 test", "mot2 test"]);
        assert_eq!(out.rejected.len(), 1);
    }

    #[test]
    fn ulc_file_roundtrip() {
        let mut u = SourceUlc::new("caisse", "retraite", UlcPattern::NounDeNoun, "caisse de retraite");
        u.corpus_freq = 14;
        u.oracle_literal_freq = Some(157_000);
        let mut buf = Vec::new();
        write_ulcs(&mut buf, std::slice::from_ref(&u)).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "caisse\tretraite\tNOUN_DE_NOUN\tcaisse de retraite\t14\t157000\t-\n"
        );
        assert_eq!(read_ulcs(buf.as_slice()).unwrap(), vec![u]);
        assert!(read_ulcs("a\tb\tNOUN_X\ts\t1\t-\t-\n".as_bytes()).is_err());
    }
}
