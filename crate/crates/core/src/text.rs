//! Tokenization and normalization shared by snippet mining, tagging and the
//! local index.

use std::collections::HashSet;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Splits text into maximal runs of letters, lowercased. Punctuation, digits
/// and whitespace all separate tokens, so `d'agneau` yields `d` and `agneau`.
pub fn tokenize(text: &str) -> Vec<String> {
    token_spans(text)
        .into_iter()
        .map(|(start, end)| text[start..end].to_lowercase())
        .collect()
}

/// Byte spans of the tokens produced by [`tokenize`].
pub fn token_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        // combining marks stay attached to the preceding letter (NFD input)
        if c.is_alphabetic() || (start.is_some() && is_combining_mark(c)) {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            spans.push((s, i));
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// Lowercases and strips diacritics (`Nucléique` -> `nucleique`).
pub fn fold(word: &str) -> String {
    word.nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect()
}

/// First `n` characters of the folded form, or `None` if the word is shorter.
pub fn folded_prefix(word: &str, n: usize) -> Option<String> {
    let folded = fold(word);
    if folded.chars().count() < n {
        return None;
    }
    Some(folded.chars().take(n).collect())
}

/// A set of function words for one language. Lookups are on lowercased forms.
#[derive(Debug, Clone, Default)]
pub struct StopWords {
    words: HashSet<String>,
}

const FRENCH_STOPWORDS: &str = include_str!("../data/stopwords.fr.txt");
const ENGLISH_STOPWORDS: &str = include_str!("../data/stopwords.en.txt");

impl StopWords {
    /// One word per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopWords { words }
    }

    /// Bundled list for a language code, empty for unknown languages.
    pub fn builtin(lang: &str) -> Self {
        match lang {
            "fr" => Self::parse(FRENCH_STOPWORDS),
            "en" => Self::parse(ENGLISH_STOPWORDS),
            _ => Self::default(),
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for StopWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopWords {
            words: iter.into_iter().map(|w| w.into().to_lowercase()).collect(),
        }
    }
}
