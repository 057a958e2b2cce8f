//! POS-tagged corpus model and parser for tagger output.
//!
//! Input is one token per line, `surface<TAB>tag<TAB>lemma`. A blank line or a
//! token whose tag maps to [`Pos::Sent`] closes the current sentence, and a
//! `#DOC <id>` line starts a new document. Raw tagger tags are mapped to
//! coarse classes through a [`Tagset`]; a file may declare its own mapping
//! with `#TAGSET raw=COARSE ...` header lines.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: expected 3 tab-separated fields, found {found}")]
    Malformed { line: usize, found: usize },
    #[error("line {line}: empty surface or lemma")]
    EmptyField { line: usize },
    #[error("line {line}: unknown tag `{tag}`")]
    UnknownTag { line: usize, tag: String },
    #[error("line {line}: bad tagset declaration `{decl}`")]
    BadTagset { line: usize, decl: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse part-of-speech classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pos {
    Noun,
    Adj,
    Prep,
    Det,
    Sent,
    Adv,
    Verb,
    Pron,
    Conj,
    Num,
    Punct,
    Other,
}

impl Pos {
    pub const ALL: [Pos; 12] = [
        Pos::Noun,
        Pos::Adj,
        Pos::Prep,
        Pos::Det,
        Pos::Sent,
        Pos::Adv,
        Pos::Verb,
        Pos::Pron,
        Pos::Conj,
        Pos::Num,
        Pos::Punct,
        Pos::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Adj => "ADJ",
            Pos::Prep => "PREP",
            Pos::Det => "DET",
            Pos::Sent => "SENT",
            Pos::Adv => "ADV",
            Pos::Verb => "VERB",
            Pos::Pron => "PRON",
            Pos::Conj => "CONJ",
            Pos::Num => "NUM",
            Pos::Punct => "PUNCT",
            Pos::Other => "OTHER",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown part of speech `{0}`")]
pub struct UnknownPos(pub String);

impl FromStr for Pos {
    type Err = UnknownPos;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pos::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| UnknownPos(s.to_string()))
    }
}

/// Mapping from raw tagger tags to coarse classes.
#[derive(Debug, Clone)]
pub struct Tagset {
    map: HashMap<String, Pos>,
}

const TREETAGGER_FRENCH: &[(&str, Pos)] = &[
    ("NOM", Pos::Noun),
    ("NAM", Pos::Noun),
    ("ADJ", Pos::Adj),
    ("PRP", Pos::Prep),
    ("PRP:det", Pos::Prep),
    ("DET:ART", Pos::Det),
    ("DET:POS", Pos::Det),
    ("SENT", Pos::Sent),
    ("ADV", Pos::Adv),
    ("VER:cond", Pos::Verb),
    ("VER:futu", Pos::Verb),
    ("VER:impe", Pos::Verb),
    ("VER:impf", Pos::Verb),
    ("VER:infi", Pos::Verb),
    ("VER:pper", Pos::Verb),
    ("VER:ppre", Pos::Verb),
    ("VER:pres", Pos::Verb),
    ("VER:simp", Pos::Verb),
    ("VER:subi", Pos::Verb),
    ("VER:subp", Pos::Verb),
    ("PRO", Pos::Pron),
    ("PRO:DEM", Pos::Pron),
    ("PRO:IND", Pos::Pron),
    ("PRO:PER", Pos::Pron),
    ("PRO:POS", Pos::Pron),
    ("PRO:REL", Pos::Pron),
    ("KON", Pos::Conj),
    ("NUM", Pos::Num),
    ("PUN", Pos::Punct),
    ("PUN:cit", Pos::Punct),
    ("ABR", Pos::Other),
    ("INT", Pos::Other),
    ("SYM", Pos::Other),
];

impl Tagset {
    /// Only the coarse class names themselves (`NOUN`, `ADJ`, ...).
    pub fn coarse() -> Self {
        let map = Pos::ALL
            .into_iter()
            .map(|p| (p.as_str().to_string(), p))
            .collect();
        Tagset { map }
    }

    /// Coarse names plus the French TreeTagger tagset. Used when a corpus
    /// carries no `#TAGSET` header.
    pub fn treetagger_french() -> Self {
        let mut set = Self::coarse();
        for (raw, pos) in TREETAGGER_FRENCH {
            set.declare(raw, *pos);
        }
        set
    }

    pub fn declare(&mut self, raw: &str, pos: Pos) {
        self.map.insert(raw.to_string(), pos);
    }

    pub fn resolve(&self, raw: &str) -> Option<Pos> {
        self.map.get(raw).copied()
    }
}

impl Default for Tagset {
    fn default() -> Self {
        Self::treetagger_french()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub surface: String,
    pub pos: Pos,
    pub lemma: String,
}

impl TaggedToken {
    pub fn new(surface: impl Into<String>, pos: Pos, lemma: impl Into<String>) -> Self {
        TaggedToken {
            surface: surface.into(),
            pos,
            lemma: lemma.into(),
        }
    }
}

pub type Sentence = Vec<TaggedToken>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

/// An immutable tagged corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaggedCorpus {
    pub documents: Vec<Document>,
}

impl TaggedCorpus {
    pub fn doc_count(&self) -> usize {
        self.documents.len()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.documents.iter().flat_map(|d| d.sentences.iter())
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences().count()
    }

    pub fn token_count(&self) -> usize {
        self.sentences().map(Vec::len).sum()
    }

    /// Number of contiguous, within-sentence occurrences of a lemma sequence.
    pub fn phrase_frequency<S: AsRef<str>>(&self, lemmas: &[S]) -> usize {
        self.sentences()
            .map(|s| sentence_phrase_frequency(s, lemmas))
            .sum()
    }
}

/// Occurrences of a lemma sequence inside one sentence.
pub fn sentence_phrase_frequency<S: AsRef<str>>(sentence: &[TaggedToken], lemmas: &[S]) -> usize {
    if lemmas.is_empty() || lemmas.len() > sentence.len() {
        return 0;
    }
    sentence
        .windows(lemmas.len())
        .filter(|w| w.iter().zip(lemmas).all(|(t, l)| t.lemma == l.as_ref()))
        .count()
}

struct Builder {
    documents: Vec<Document>,
    sentence: Sentence,
}

impl Builder {
    fn current_doc(&mut self) -> &mut Document {
        if self.documents.is_empty() {
            self.documents.push(Document {
                id: "0".to_string(),
                sentences: Vec::new(),
            });
        }
        self.documents.last_mut().unwrap()
    }

    fn close_sentence(&mut self) {
        if !self.sentence.is_empty() {
            let sentence = std::mem::take(&mut self.sentence);
            self.current_doc().sentences.push(sentence);
        }
    }

    fn start_document(&mut self, id: &str) {
        self.close_sentence();
        self.documents.push(Document {
            id: id.to_string(),
            sentences: Vec::new(),
        });
    }
}

/// Parses tagger output using the default tagset (overridable by headers).
pub fn parse_tagged_corpus<R: BufRead>(reader: R) -> Result<TaggedCorpus, CorpusError> {
    parse_tagged_corpus_with(reader, Tagset::default())
}

pub fn parse_tagged_corpus_with<R: BufRead>(
    reader: R,
    tagset: Tagset,
) -> Result<TaggedCorpus, CorpusError> {
    let mut tagset = tagset;
    let mut declared = false;
    let mut b = Builder {
        documents: Vec::new(),
        sentence: Vec::new(),
    };

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');

        if line.trim().is_empty() {
            b.close_sentence();
            continue;
        }
        if let Some(rest) = directive(line, "#DOC") {
            b.start_document(rest.trim());
            continue;
        }
        if let Some(rest) = directive(line, "#TAGSET") {
            if !declared {
                tagset = Tagset::coarse();
                declared = true;
            }
            for decl in rest.split_whitespace() {
                let bad = || CorpusError::BadTagset {
                    line: line_no,
                    decl: decl.to_string(),
                };
                let (raw, coarse) = decl.split_once('=').ok_or_else(bad)?;
                let pos = coarse.parse::<Pos>().map_err(|_| bad())?;
                tagset.declare(raw, pos);
            }
            continue;
        }

        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(CorpusError::Malformed {
                line: line_no,
                found: fields.len(),
            });
        }
        let (surface, tag, lemma) = (fields[0], fields[1], fields[2]);
        if surface.is_empty() || lemma.is_empty() {
            return Err(CorpusError::EmptyField { line: line_no });
        }
        let pos = tagset.resolve(tag).ok_or_else(|| CorpusError::UnknownTag {
            line: line_no,
            tag: tag.to_string(),
        })?;
        // TreeTagger marks unrecognised words this way
        let lemma = if lemma == "<unknown>" { surface } else { lemma };

        b.sentence.push(TaggedToken::new(surface, pos, lemma));
        if pos == Pos::Sent {
            b.close_sentence();
        }
    }
    b.close_sentence();
    Ok(TaggedCorpus {
        documents: b.documents,
    })
}

fn directive<'a>(line: &'a str, name: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(name)?;
    if rest.is_empty() || rest.starts_with([' ', '\t']) {
        Some(rest)
    } else {
        None
    }
}
