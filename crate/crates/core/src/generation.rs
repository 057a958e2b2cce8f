//! Compositional candidate translations and their hit-count queries.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::corpus::Pos;
use crate::dictionary::{modifier_pos, BilingualDictionary, Constituent};
use crate::extraction::{SourceUlc, UlcPattern};
use crate::oracle::{OracleQuery, PhraseSet};

/// Source pattern to target word order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransformRule {
    /// `N1 de N2` -> `N1 of N2`
    N1OfN2,
    /// `N1 de N2` -> `N2 N1`
    N2N1,
    /// `N ADJ` -> `ADJ N`
    AdjN,
}

impl TransformRule {
    pub fn as_str(self) -> &'static str {
        match self {
            TransformRule::N1OfN2 => "N1_OF_N2",
            TransformRule::N2N1 => "N2_N1",
            TransformRule::AdjN => "ADJ_N",
        }
    }

    pub fn for_pattern(pattern: UlcPattern) -> &'static [TransformRule] {
        match pattern {
            UlcPattern::NounAdj => &[TransformRule::AdjN],
            UlcPattern::NounDeNoun | UlcPattern::NounDNoun => {
                &[TransformRule::N1OfN2, TransformRule::N2N1]
            }
        }
    }

    /// Tie-break rank among equally frequent winners; lower wins.
    pub fn priority(self) -> u8 {
        match self {
            TransformRule::N2N1 => 0,
            TransformRule::N1OfN2 => 1,
            TransformRule::AdjN => 2,
        }
    }

    pub fn apply(self, head: &str, modifier: &str) -> String {
        match self {
            TransformRule::N1OfN2 => format!("{head} of {modifier}"),
            TransformRule::N2N1 | TransformRule::AdjN => format!("{modifier} {head}"),
        }
    }
}

impl fmt::Display for TransformRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Generated,
    Dictionary,
    Cognate,
    FrequentPair,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Generated => "GENERATED",
            Origin::Dictionary => "DICTIONARY",
            Origin::Cognate => "COGNATE",
            Origin::FrequentPair => "FREQUENT_PAIR",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One target-language phrase proposed for a source CLU.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateTranslation {
    /// Surface of the source CLU.
    pub source: String,
    /// Lowercased target phrase.
    pub target_surface: String,
    /// `None` for mined candidates.
    pub rule: Option<TransformRule>,
    pub origin: Origin,
    /// Translation of the source head noun this candidate was built from.
    pub head_target: Option<String>,
    pub scores: BTreeMap<String, f64>,
}

impl CandidateTranslation {
    pub fn mined(source: &str, target: &str, origin: Origin) -> Self {
        CandidateTranslation {
            source: source.to_string(),
            target_surface: target.to_lowercase(),
            rule: None,
            origin,
            head_target: None,
            scores: BTreeMap::new(),
        }
    }

    pub fn score(&self, name: &str) -> Option<f64> {
        self.scores.get(name).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerationError {
    #[error("constituent(s) missing from dictionary: {0:?}")]
    MissingConstituent(Vec<Constituent>),
    #[error("empty candidate translation")]
    EmptyCandidate,
}

/// All combinations of constituent translations under each rule applicable
/// to the pattern, de-duplicated on the target phrase.
pub fn generate_candidates(
    ulc: &SourceUlc,
    dict: &BilingualDictionary,
) -> Result<Vec<CandidateTranslation>, GenerationError> {
    let heads = dict.lookup(&ulc.head_lemma, Pos::Noun);
    let modifiers = dict.lookup(&ulc.modifier_lemma, modifier_pos(ulc.pattern));
    let (heads, modifiers) = match (heads, modifiers) {
        (Some(h), Some(m)) => (h, m),
        (h, m) => {
            let mut missing = Vec::new();
            if h.is_none() {
                missing.push(Constituent::Head);
            }
            if m.is_none() {
                missing.push(Constituent::Modifier);
            }
            return Err(GenerationError::MissingConstituent(missing));
        }
    };

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for head in heads {
        let head = head.to_lowercase();
        for modifier in modifiers {
            let modifier = modifier.to_lowercase();
            for &rule in TransformRule::for_pattern(ulc.pattern) {
                let target = rule.apply(&head, &modifier);
                if seen.insert(target.clone()) {
                    out.push(CandidateTranslation {
                        source: ulc.surface.clone(),
                        target_surface: target,
                        rule: Some(rule),
                        origin: Origin::Generated,
                        head_target: Some(head.clone()),
                        scores: BTreeMap::new(),
                    });
                }
            }
        }
    }
    Ok(out)
}

fn indefinite_article(phrase: &str, use_an: bool) -> &'static str {
    let starts_with_vowel = crate::text::fold(phrase)
        .chars()
        .next()
        .is_some_and(|c| "aeiou".contains(c));
    if use_an && starts_with_vowel {
        "an"
    } else {
        "a"
    }
}

/// `"the X" OR "a X"` for a candidate phrase X. With `use_an`, `an` replaces
/// `a` before a vowel.
pub fn build_validation_queries(
    cand: &CandidateTranslation,
    use_an: bool,
) -> Result<OracleQuery, GenerationError> {
    let phrase = cand.target_surface.trim();
    if phrase.is_empty() {
        return Err(GenerationError::EmptyCandidate);
    }
    let article = indefinite_article(phrase, use_an);
    Ok(OracleQuery::count_of(PhraseSet::any_of([
        format!("the {phrase}"),
        format!("{article} {phrase}"),
    ])))
}
