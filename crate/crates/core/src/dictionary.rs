//! Bilingual dictionary and CLU classification by constituent polysemy.
//!
//! File format: `lemma<TAB>pos<TAB>translation1|translation2|...`, one entry
//! per line, `#` comments allowed. A lemma containing `_` is a multiword
//! source entry (`caisse_claire`, `caisse_d'épargne`); its translations keep
//! `_` or spaces between words.

use std::collections::HashMap;
use std::io::BufRead;

use thiserror::Error;

use crate::corpus::Pos;
use crate::extraction::{SourceUlc, UlcPattern};

#[derive(Debug, Error)]
pub enum DictionaryError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictEntry {
    pub lemma: String,
    pub pos: Pos,
    /// Non-empty, no duplicates, in file order.
    pub translations: Vec<String>,
}

impl DictEntry {
    fn merge(&mut self, more: Vec<String>) {
        for t in more {
            if !self.translations.contains(&t) {
                self.translations.push(t);
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BilingualDictionary {
    simple: HashMap<(String, Pos), DictEntry>,
    /// Multiword entries keyed by their (head, modifier) lemma pair.
    multiword: HashMap<(String, String), DictEntry>,
}

impl BilingualDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry, merging translation lists with any existing entry for
    /// the same (lemma, pos).
    pub fn insert(&mut self, lemma: &str, pos: Pos, translations: Vec<String>) {
        let mut cleaned: Vec<String> = Vec::new();
        for t in translations {
            let t = t.replace('_', " ").trim().to_string();
            if !t.is_empty() && !cleaned.contains(&t) {
                cleaned.push(t);
            }
        }
        if cleaned.is_empty() {
            return;
        }
        let fresh = |lemma: &str| DictEntry {
            lemma: lemma.to_string(),
            pos,
            translations: Vec::new(),
        };
        if lemma.contains('_') {
            let words: Vec<&str> = lemma.split('_').collect();
            if let Some(key) = pair_key(&words) {
                self.multiword
                    .entry(key)
                    .or_insert_with(|| fresh(lemma))
                    .merge(cleaned);
                return;
            }
        }
        self.simple
            .entry((lemma.to_string(), pos))
            .or_insert_with(|| fresh(lemma))
            .merge(cleaned);
    }

    pub fn lookup(&self, lemma: &str, pos: Pos) -> Option<&[String]> {
        self.simple
            .get(&(lemma.to_string(), pos))
            .map(|e| e.translations.as_slice())
    }

    pub fn contains(&self, lemma: &str, pos: Pos) -> bool {
        self.lookup(lemma, pos).is_some()
    }

    /// Multiword entry for a CLU, matched on the (head, modifier) lemma pair
    /// or on the words of its surface form, regardless of pattern.
    pub fn multiword_for(&self, ulc: &SourceUlc) -> Option<&DictEntry> {
        let by_lemma = (ulc.head_lemma.clone(), ulc.modifier_lemma.clone());
        self.multiword.get(&by_lemma).or_else(|| {
            let words: Vec<&str> = ulc.surface.split_whitespace().collect();
            pair_key(&words).and_then(|k| self.multiword.get(&k))
        })
    }

    pub fn len(&self) -> usize {
        self.simple.len() + self.multiword.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reduces `caisse de retraite` / `caisse d'épargne` / `ambiance musicale`
/// word lists to their two content words.
fn pair_key(words: &[&str]) -> Option<(String, String)> {
    let content: Vec<String> = words
        .iter()
        .map(|w| w.to_lowercase())
        .filter(|w| w != "de" && w != "d'" && w != "d’")
        .map(|w| {
            w.strip_prefix("d'")
                .or_else(|| w.strip_prefix("d’"))
                .map(str::to_string)
                .unwrap_or(w)
        })
        .collect();
    match content.as_slice() {
        [head, modifier] => Some((head.clone(), modifier.clone())),
        _ => None,
    }
}

pub fn load_dictionary<R: BufRead>(reader: R) -> Result<BilingualDictionary, DictionaryError> {
    let mut dict = BilingualDictionary::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let malformed = |reason: &str| DictionaryError::Malformed {
            line: line_no,
            reason: reason.to_string(),
        };
        let fields: Vec<&str> = trimmed.split('\t').collect();
        let [lemma, pos, translations] = fields.as_slice() else {
            return Err(malformed("expected lemma<TAB>pos<TAB>translations"));
        };
        let lemma = lemma.trim();
        if lemma.is_empty() {
            return Err(malformed("empty lemma"));
        }
        let pos: Pos = pos
            .trim()
            .parse()
            .map_err(|e: crate::corpus::UnknownPos| malformed(&e.to_string()))?;
        let translations: Vec<String> = translations
            .split('|')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect();
        if translations.is_empty() {
            return Err(malformed("no translations"));
        }
        dict.insert(lemma, pos, translations);
    }
    Ok(dict)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UlcKind {
    NonPolysemous,
    Polysemous,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constituent {
    Head,
    Modifier,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UlcClass {
    pub kind: UlcKind,
    /// Non-empty iff `kind` is `Unknown`.
    pub unknown_constituents: Vec<Constituent>,
    /// Translation of a matching multiword dictionary entry.
    pub dictionary_translation: Option<String>,
}

/// POS under which the modifier is looked up.
pub fn modifier_pos(pattern: UlcPattern) -> Pos {
    match pattern {
        UlcPattern::NounAdj => Pos::Adj,
        UlcPattern::NounDeNoun | UlcPattern::NounDNoun => Pos::Noun,
    }
}

pub fn classify_ulc(ulc: &SourceUlc, dict: &BilingualDictionary) -> UlcClass {
    let head = dict.lookup(&ulc.head_lemma, Pos::Noun);
    let modifier = dict.lookup(&ulc.modifier_lemma, modifier_pos(ulc.pattern));

    let mut unknown = Vec::new();
    if head.is_none() {
        unknown.push(Constituent::Head);
    }
    if modifier.is_none() {
        unknown.push(Constituent::Modifier);
    }
    let kind = match (head, modifier) {
        (Some(h), Some(m)) if h.len() == 1 && m.len() == 1 => UlcKind::NonPolysemous,
        (Some(_), Some(_)) => UlcKind::Polysemous,
        _ => UlcKind::Unknown,
    };
    UlcClass {
        kind,
        unknown_constituents: unknown,
        dictionary_translation: dict
            .multiword_for(ulc)
            .map(|e| e.translations[0].clone()),
    }
}
