//! Translation mining from target-language pages that quote the source
//! phrase: cognate bigrams first, frequent bigrams second, each validated like
//! phase-2 candidates.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use crate::extraction::SourceUlc;
use crate::generation::{CandidateTranslation, Origin};
use crate::oracle::{OracleError, OracleQuery, SearchOracle, Snippet};
use crate::phase2::{validate_candidates, Phase2Config, ValidationOutcome, WorldContext};
use crate::text::{fold, folded_prefix, tokenize, StopWords};

pub const PREFIX_LEN: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Phase3Config {
    pub snippet_limit: usize,
    /// Candidates kept per sub-step.
    pub top_k: usize,
    pub min_pair_freq: usize,
    /// Also drop bigrams containing a target-language stopword.
    pub exclude_target_stopwords: bool,
}

impl Default for Phase3Config {
    fn default() -> Self {
        Phase3Config {
            snippet_limit: 1000,
            top_k: 10,
            min_pair_freq: 2,
            exclude_target_stopwords: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedCandidate {
    pub base: CandidateTranslation,
    /// Occurrences of the bigram in the snippets.
    pub evidence: usize,
    /// Folded prefix shared with a source constituent (cognates only).
    pub matched_prefix: Option<String>,
}

impl MinedCandidate {
    pub fn log_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.base.source,
            self.base.target_surface,
            self.base.origin,
            self.evidence,
            self.matched_prefix.as_deref().unwrap_or("-")
        )
    }
}

pub const MINED_LOG_HEADER: &str = "source\tcandidate\torigin\tevidence\tmatched_prefix";

pub fn write_mined_log<W: Write>(mut w: W, mined: &[MinedCandidate]) -> std::io::Result<()> {
    writeln!(w, "{MINED_LOG_HEADER}")?;
    for m in mined {
        writeln!(w, "{}", m.log_line())?;
    }
    Ok(())
}

/// Snippets of target-language pages containing the source phrase.
pub fn collect_mixed_snippets(
    ulc: &SourceUlc,
    oracle: &SearchOracle,
    target_lang: &str,
    limit: usize,
) -> Result<Vec<Snippet>, OracleError> {
    oracle.fetch_snippets(&OracleQuery::mixed_snippets(&ulc.surface, target_lang, limit))
}

/// Words that may not appear in a mined bigram.
pub struct TokenFilter<'a> {
    source_tokens: HashSet<String>,
    source_stop: &'a StopWords,
    target_stop: Option<&'a StopWords>,
}

impl<'a> TokenFilter<'a> {
    pub fn new(ulc: &SourceUlc, source_stop: &'a StopWords, target_stop: Option<&'a StopWords>) -> Self {
        let mut source_tokens: HashSet<String> =
            ulc.surface_tokens().iter().map(|t| fold(t)).collect();
        source_tokens.insert(fold(&ulc.head_lemma));
        source_tokens.insert(fold(&ulc.modifier_lemma));
        TokenFilter {
            source_tokens,
            source_stop,
            target_stop,
        }
    }

    pub fn allows(&self, token: &str) -> bool {
        !self.source_tokens.contains(&fold(token))
            && !self.source_stop.contains(token)
            && !self.target_stop.is_some_and(|s| s.contains(token))
    }
}

/// Adjacent token pairs of each snippet, with both tokens allowed, counted
/// over all occurrences.
pub fn count_bigrams<S: AsRef<str>>(snippets: &[S], filter: &TokenFilter<'_>) -> BTreeMap<(String, String), usize> {
    let mut counts = BTreeMap::new();
    for s in snippets {
        let toks = tokenize(s.as_ref());
        for w in toks.windows(2) {
            if filter.allows(&w[0]) && filter.allows(&w[1]) {
                *counts.entry((w[0].clone(), w[1].clone())).or_default() += 1;
            }
        }
    }
    counts
}

fn ranked(counts: impl IntoIterator<Item = ((String, String), usize)>, min: usize, top_k: usize) -> Vec<((String, String), usize)> {
    let mut v: Vec<_> = counts.into_iter().filter(|(_, n)| *n >= min).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(top_k);
    v
}

/// Prefixes of the constituents long enough to carry one.
fn constituent_prefixes(ulc: &SourceUlc) -> Vec<String> {
    let mut out = Vec::new();
    for lemma in [&ulc.head_lemma, &ulc.modifier_lemma] {
        match folded_prefix(lemma, PREFIX_LEN) {
            Some(p) if !out.contains(&p) => out.push(p),
            Some(_) => {}
            None => log::debug!("{}: constituent {lemma:?} too short for cognates", ulc.surface),
        }
    }
    out
}

/// Whether two words share their folded four-letter prefix.
pub fn is_cognate(source: &str, target: &str) -> bool {
    match (folded_prefix(source, PREFIX_LEN), folded_prefix(target, PREFIX_LEN)) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

/// Bigrams containing a token that shares a constituent's prefix, ranked by
/// occurrence count.
pub fn find_cognates<S: AsRef<str>>(
    snippets: &[S],
    ulc: &SourceUlc,
    filter: &TokenFilter<'_>,
    top_k: usize,
) -> Vec<MinedCandidate> {
    let prefixes = constituent_prefixes(ulc);
    if prefixes.is_empty() {
        return Vec::new();
    }
    let prefix_of = |tok: &str| {
        folded_prefix(tok, PREFIX_LEN).filter(|p| prefixes.contains(p))
    };
    let counts = count_bigrams(snippets, filter)
        .into_iter()
        .filter(|((a, b), _)| prefix_of(a).is_some() || prefix_of(b).is_some());
    ranked(counts, 1, top_k)
        .into_iter()
        .map(|((a, b), n)| MinedCandidate {
            matched_prefix: prefix_of(&a).or_else(|| prefix_of(&b)),
            base: CandidateTranslation::mined(&ulc.surface, &format!("{a} {b}"), Origin::Cognate),
            evidence: n,
        })
        .collect()
}

/// The `top_k` most frequent allowed bigrams seen at least `min_freq` times.
pub fn find_frequent_pairs<S: AsRef<str>>(
    snippets: &[S],
    ulc: &SourceUlc,
    filter: &TokenFilter<'_>,
    min_freq: usize,
    top_k: usize,
) -> Vec<MinedCandidate> {
    ranked(count_bigrams(snippets, filter), min_freq.max(1), top_k)
        .into_iter()
        .map(|((a, b), n)| MinedCandidate {
            base: CandidateTranslation::mined(&ulc.surface, &format!("{a} {b}"), Origin::FrequentPair),
            evidence: n,
            matched_prefix: None,
        })
        .collect()
}

/// Runs the phase-2 filters and world comparison on mined candidates.
pub fn validate_mined(
    cands: &[MinedCandidate],
    ulc: &SourceUlc,
    oracle: &SearchOracle,
    ctx: &WorldContext<'_>,
    config: &Phase2Config,
) -> Result<ValidationOutcome, OracleError> {
    let base = cands
        .iter()
        .map(|m| {
            let mut c = m.base.clone();
            c.scores.insert("phase3.evidence".into(), m.evidence as f64);
            c
        })
        .collect();
    validate_candidates(base, ulc, oracle, ctx, config)
}

#[derive(Debug, Clone, Default)]
pub struct Phase3Outcome {
    pub snippet_count: usize,
    pub mined: Vec<MinedCandidate>,
    pub cognate: Option<ValidationOutcome>,
    pub pairs: Option<ValidationOutcome>,
}

impl Phase3Outcome {
    /// The accepted translation and the sub-step that produced it.
    pub fn selected(&self) -> Option<&CandidateTranslation> {
        self.cognate
            .as_ref()
            .and_then(|o| o.selected.as_ref())
            .or_else(|| self.pairs.as_ref().and_then(|o| o.selected.as_ref()))
    }

    pub fn needs_retry(&self) -> bool {
        self.selected().is_none()
            && [&self.cognate, &self.pairs]
                .into_iter()
                .flatten()
                .any(|o| !o.unresolved.is_empty())
    }
}

/// Collects mixed snippets and runs the cognate sub-step, then, only if it
/// produced no translation, the frequent-pair sub-step.
pub fn run_phase3(
    ulc: &SourceUlc,
    oracle: &SearchOracle,
    ctx: &WorldContext<'_>,
    p2: &Phase2Config,
    p3: &Phase3Config,
) -> Result<Phase3Outcome, OracleError> {
    let snippets = collect_mixed_snippets(ulc, oracle, ctx.target.lang, p3.snippet_limit)?;
    let mut out = Phase3Outcome {
        snippet_count: snippets.len(),
        ..Phase3Outcome::default()
    };
    if snippets.is_empty() {
        return Ok(out);
    }
    let texts: Vec<&str> = snippets.iter().map(|s| s.text.as_str()).collect();
    let filter = TokenFilter::new(
        ulc,
        ctx.source.stopwords,
        p3.exclude_target_stopwords.then_some(ctx.target.stopwords),
    );

    let cognates = find_cognates(&texts, ulc, &filter, p3.top_k);
    if !cognates.is_empty() {
        let outcome = validate_mined(&cognates, ulc, oracle, ctx, p2)?;
        out.mined.extend(cognates);
        let done = outcome.selected.is_some();
        out.cognate = Some(outcome);
        if done {
            return Ok(out);
        }
    }

    let pairs = find_frequent_pairs(&texts, ulc, &filter, p3.min_pair_freq, p3.top_k);
    if !pairs.is_empty() {
        let outcome = validate_mined(&pairs, ulc, oracle, ctx, p2)?;
        out.mined.extend(pairs);
        out.pairs = Some(outcome);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::UlcPattern;

    fn ulc(head: &str, modifier: &str, pattern: UlcPattern, surface: &str) -> SourceUlc {
        SourceUlc::new(head, modifier, pattern, surface)
    }

    #[test]
    fn prefix_rule() {
        assert!(is_cognate("nucléique", "nucleic"));
        assert!(is_cognate("langue", "language"));
        assert!(is_cognate("café", "CAFE"));
        assert!(!is_cognate("eau", "eau"));
        assert!(!is_cognate("souris", "shank"));
    }

    #[test]
    fn nucleic_acid() {
        let u = ulc("acide", "nucléique", UlcPattern::NounAdj, "acide nucléique");
        let snippets = [
            "the acide nucléique, or nucleic acid, is a polymer",
            "Nucleic acid sequencing of the acide nucléique",
            "nucleic acids and proteins",
        ];
        let empty = StopWords::default();
        let en = StopWords::builtin("en");
        let filter = TokenFilter::new(&u, &empty, Some(&en));
        let c = find_cognates(&snippets, &u, &filter, 10);
        assert_eq!(c[0].base.target_surface, "nucleic acid");
        assert_eq!(c[0].evidence, 2);
        assert_eq!(c[0].base.origin, Origin::Cognate);
        assert!(c.iter().all(|m| m.matched_prefix.as_ref().is_some_and(|p| p.chars().count() == 4)));
        assert!(c.iter().any(|m| m.base.target_surface == "nucleic acids"));
        // source tokens never appear in candidates
        assert!(c.iter().all(|m| !m.base.target_surface.contains("nucléique")));
    }

    #[test]
    fn short_constituents_yield_no_cognates() {
        let u = ulc("eau", "sel", UlcPattern::NounDeNoun, "eau de sel");
        let empty = StopWords::default();
        let filter = TokenFilter::new(&u, &empty, None);
        assert!(find_cognates(&["eaux salty water seller"], &u, &filter, 10).is_empty());
    }

    #[test]
    fn lamb_shank() {
        let u = ulc("souris", "agneau", UlcPattern::NounDNoun, "souris d'agneau");
        let snippets = [
            "Braised lamb shank (souris d'agneau) with garlic",
            "souris d'agneau: slow cooked lamb shank",
            "the lamb shank recipe",
            "with garlic",
        ];
        let fr = StopWords::builtin("fr");
        let en = StopWords::builtin("en");
        let filter = TokenFilter::new(&u, &fr, Some(&en));
        let p = find_frequent_pairs(&snippets, &u, &filter, 2, 10);
        assert_eq!(p[0].base.target_surface, "lamb shank");
        assert_eq!(p[0].evidence, 3);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].base.origin, Origin::FrequentPair);
    }

    #[test]
    fn nothing_frequent_enough() {
        let u = ulc("souris", "agneau", UlcPattern::NounDNoun, "souris d'agneau");
        let empty = StopWords::default();
        let filter = TokenFilter::new(&u, &empty, None);
        assert!(find_frequent_pairs(&["alpha beta", "gamma delta"], &u, &filter, 2, 10).is_empty());
    }

    #[test]
    fn mined_log_line() {
        let m = MinedCandidate {
            base: CandidateTranslation::mined("acide nucléique", "nucleic acid", Origin::Cognate),
            evidence: 5,
            matched_prefix: Some("nucl".into()),
        };
        assert_eq!(m.log_line(), "acide nucléique\tnucleic acid\tCOGNATE\t5\tnucl");
    }
}
