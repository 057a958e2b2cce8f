//! Snippet tagging.
//!
//! [`Tagger`] is the extension point for real taggers. [`LexiconTagger`] is a
//! word-list fallback: each known word form maps to a coarse POS and lemma,
//! everything else is tagged [`Pos::Other`].

use std::collections::HashMap;

use crate::corpus::Pos;
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedWord {
    pub surface: String,
    pub pos: Pos,
    pub lemma: String,
}

pub trait Tagger: Send + Sync {
    fn tag(&self, text: &str) -> Vec<TaggedWord>;
}

#[derive(Debug, Clone, Default)]
pub struct LexiconTagger {
    forms: HashMap<String, (Pos, String)>,
}

const FRENCH_LEXICON: &str = include_str!("../data/lexicon.fr.tsv");
const ENGLISH_LEXICON: &str = include_str!("../data/lexicon.en.tsv");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("lexicon line {line}: {reason}")]
pub struct LexiconError {
    pub line: usize,
    pub reason: String,
}

impl LexiconTagger {
    /// Lines `form<TAB>POS[<TAB>lemma]`; the lemma defaults to the form.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut forms = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let err = |reason: String| LexiconError {
                line: idx + 1,
                reason,
            };
            let (form, pos, lemma) = match f.as_slice() {
                [form, pos] => (*form, *pos, *form),
                [form, pos, lemma] => (*form, *pos, *lemma),
                _ => return Err(err("expected form<TAB>POS[<TAB>lemma]".into())),
            };
            let pos: Pos = pos.parse().map_err(|e: crate::corpus::UnknownPos| err(e.to_string()))?;
            forms.insert(form.to_lowercase(), (pos, lemma.to_lowercase()));
        }
        Ok(LexiconTagger { forms })
    }

    /// Bundled lexicon for `fr` or `en`; empty otherwise.
    pub fn builtin(lang: &str) -> Self {
        let text = match lang {
            "fr" => FRENCH_LEXICON,
            "en" => ENGLISH_LEXICON,
            _ => "",
        };
        Self::parse(text).expect("bundled lexicon is well-formed")
    }

    pub fn insert(&mut self, form: &str, pos: Pos, lemma: &str) {
        self.forms
            .insert(form.to_lowercase(), (pos, lemma.to_lowercase()));
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }
}

impl Tagger for LexiconTagger {
    fn tag(&self, text: &str) -> Vec<TaggedWord> {
        tokenize(text)
            .into_iter()
            .map(|surface| match self.forms.get(&surface) {
                Some((pos, lemma)) => TaggedWord {
                    pos: *pos,
                    lemma: lemma.clone(),
                    surface,
                },
                None => TaggedWord {
                    pos: Pos::Other,
                    lemma: surface.clone(),
                    surface,
                },
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_known_forms_and_leaves_the_rest_other() {
        let t = LexiconTagger::parse("retraites\tNOUN\tretraite\npaisible\tADJ\n").unwrap();
        let words = t.tag("Des retraites paisibles, paisible.");
        let tags: Vec<_> = words.iter().map(|w| (w.lemma.as_str(), w.pos)).collect();
        assert_eq!(
            tags,
            [
                ("des", Pos::Other),
                ("retraite", Pos::Noun),
                ("paisibles", Pos::Other),
                ("paisible", Pos::Adj)
            ]
        );
    }

    #[test]
    fn bad_lexicon_line() {
        assert_eq!(LexiconTagger::parse("a\tNOUN\nb\n").unwrap_err().line, 2);
        assert!(LexiconTagger::parse("a\tZZZ\n").is_err());
    }

    #[test]
    fn builtin_lexicons_load() {
        assert!(!LexiconTagger::builtin("fr").is_empty());
        assert!(!LexiconTagger::builtin("en").is_empty());
        assert!(LexiconTagger::builtin("de").is_empty());
    }
}
