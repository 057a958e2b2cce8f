//! Lexical worlds: the most frequent nouns and adjectives in the search
//! snippets of a phrase, and their comparison across languages.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::corpus::Pos;
use crate::dictionary::BilingualDictionary;
use crate::oracle::{OracleError, OracleQuery, SearchOracle};
use crate::tagger::Tagger;
use crate::text::StopWords;

pub const WORLD_SIZE: usize = 50;
pub const SNIPPET_LIMIT: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalWorld {
    pub phrase: String,
    pub lang: String,
    /// (lemma, frequency), frequency-descending then lemma-ascending.
    pub nouns: Vec<(String, usize)>,
    pub adjectives: Vec<(String, usize)>,
    pub snippet_count: usize,
}

impl LexicalWorld {
    pub fn empty(phrase: &str, lang: &str) -> Self {
        LexicalWorld {
            phrase: phrase.to_string(),
            lang: lang.to_string(),
            nouns: Vec::new(),
            adjectives: Vec::new(),
            snippet_count: 0,
        }
    }

    /// One line: `phrase<TAB>lang<TAB>snippets<TAB>noun:freq ...<TAB>adj:freq ...`.
    pub fn dump_line(&self) -> String {
        let list = |items: &[(String, usize)]| {
            items
                .iter()
                .map(|(l, f)| format!("{l}:{f}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = String::new();
        let _ = write!(
            s,
            "{}\t{}\t{}\t{}\t{}",
            self.phrase,
            self.lang,
            self.snippet_count,
            list(&self.nouns),
            list(&self.adjectives)
        );
        s
    }
}

/// Language-specific resources for building worlds in one language.
pub struct LanguageKit<'a> {
    pub lang: &'a str,
    pub tagger: &'a dyn Tagger,
    pub stopwords: &'a StopWords,
}

/// Ranks tagged snippet words into a world.
pub fn world_from_snippets<S: AsRef<str>>(
    phrase: &str,
    kit: &LanguageKit<'_>,
    snippets: &[S],
    exclude: &HashSet<String>,
    size: usize,
) -> LexicalWorld {
    let mut nouns: HashMap<String, usize> = HashMap::new();
    let mut adjectives: HashMap<String, usize> = HashMap::new();
    for snippet in snippets {
        for w in kit.tagger.tag(snippet.as_ref()) {
            let bucket = match w.pos {
                Pos::Noun => &mut nouns,
                Pos::Adj => &mut adjectives,
                _ => continue,
            };
            if kit.stopwords.contains(&w.lemma)
                || kit.stopwords.contains(&w.surface)
                || exclude.contains(&w.lemma)
                || exclude.contains(&w.surface)
            {
                continue;
            }
            *bucket.entry(w.lemma).or_default() += 1;
        }
    }
    LexicalWorld {
        phrase: phrase.to_string(),
        lang: kit.lang.to_string(),
        nouns: top_n(nouns, size),
        adjectives: top_n(adjectives, size),
        snippet_count: snippets.len(),
    }
}

fn top_n(counts: HashMap<String, usize>, n: usize) -> Vec<(String, usize)> {
    let mut v: Vec<(String, usize)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(n);
    v
}

/// Fetches up to `snippet_limit` snippets for the exact phrase in the kit's
/// language and builds its world. Words in `exclude` (the phrase's own
/// constituents) are left out.
pub fn build_lexical_world(
    phrase: &str,
    kit: &LanguageKit<'_>,
    oracle: &SearchOracle,
    exclude: &HashSet<String>,
    snippet_limit: usize,
    size: usize,
) -> Result<LexicalWorld, OracleError> {
    let query = OracleQuery::snippets(phrase, Some(kit.lang), snippet_limit);
    let snippets = oracle.fetch_snippets(&query)?;
    let texts: Vec<&str> = snippets.iter().map(|s| s.text.as_str()).collect();
    Ok(world_from_snippets(phrase, kit, &texts, exclude, size))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldSimilarity {
    pub noun_jaccard: f64,
    pub adj_jaccard: f64,
    /// (source lemma, target lemma) pairs counted in the intersection.
    pub matched_nouns: Vec<(String, String)>,
    pub matched_adjs: Vec<(String, String)>,
}

impl WorldSimilarity {
    pub fn combined(&self) -> f64 {
        (self.noun_jaccard + self.adj_jaccard) / 2.0
    }
}

/// Compares a source-language world with a target-language world through the
/// dictionary, per category.
///
/// A source lemma and a target lemma are linked when the target lemma is one
/// of the source lemma's translations under the same POS. The intersection is
/// a maximum one-to-one matching over those links, so each word on either
/// side counts at most once, and the score is
/// `|matched| / (|src| + |tgt| - |matched|)` (0 when both lists are empty).
pub fn compare_worlds(
    src: &LexicalWorld,
    tgt: &LexicalWorld,
    dict: &BilingualDictionary,
) -> WorldSimilarity {
    let (noun_jaccard, matched_nouns) = category_jaccard(&src.nouns, &tgt.nouns, Pos::Noun, dict);
    let (adj_jaccard, matched_adjs) =
        category_jaccard(&src.adjectives, &tgt.adjectives, Pos::Adj, dict);
    WorldSimilarity {
        noun_jaccard,
        adj_jaccard,
        matched_nouns,
        matched_adjs,
    }
}

fn category_jaccard(
    src: &[(String, usize)],
    tgt: &[(String, usize)],
    pos: Pos,
    dict: &BilingualDictionary,
) -> (f64, Vec<(String, String)>) {
    let src_lemmas: Vec<&str> = dedup(src);
    let tgt_lemmas: Vec<&str> = dedup(tgt);
    let tgt_index: HashMap<&str, usize> = tgt_lemmas
        .iter()
        .enumerate()
        .map(|(i, l)| (*l, i))
        .collect();

    let links: Vec<Vec<usize>> = src_lemmas
        .iter()
        .map(|s| {
            let mut targets: Vec<usize> = dict
                .lookup(s, pos)
                .unwrap_or_default()
                .iter()
                .filter_map(|t| tgt_index.get(t.to_lowercase().as_str()).copied())
                .collect();
            targets.sort_unstable();
            targets.dedup();
            targets
        })
        .collect();

    let matching = max_bipartite_matching(&links, tgt_lemmas.len());
    let pairs: Vec<(String, String)> = matching
        .iter()
        .enumerate()
        .filter_map(|(s, t)| t.map(|t| (src_lemmas[s].to_string(), tgt_lemmas[t].to_string())))
        .collect();

    let inter = pairs.len();
    let union = src_lemmas.len() + tgt_lemmas.len() - inter;
    let score = if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    };
    (score, pairs)
}

fn dedup(items: &[(String, usize)]) -> Vec<&str> {
    let mut seen = HashSet::new();
    items
        .iter()
        .map(|(l, _)| l.as_str())
        .filter(|l| seen.insert(*l))
        .collect()
}

/// Augmenting-path matching. `links[s]` lists the right-side nodes adjacent to
/// left node `s`. Returns, per left node, its matched right node.
fn max_bipartite_matching(links: &[Vec<usize>], right: usize) -> Vec<Option<usize>> {
    fn augment(
        s: usize,
        links: &[Vec<usize>],
        visited: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for &t in &links[s] {
            if visited[t] {
                continue;
            }
            visited[t] = true;
            if owner[t].is_none_or(|o| augment(o, links, visited, owner)) {
                owner[t] = Some(s);
                return true;
            }
        }
        false
    }

    let mut owner: Vec<Option<usize>> = vec![None; right];
    for s in 0..links.len() {
        let mut visited = vec![false; right];
        augment(s, links, &mut visited, &mut owner);
    }
    let mut matched = vec![None; links.len()];
    for (t, s) in owner.iter().enumerate() {
        if let Some(s) = s {
            matched[*s] = Some(t);
        }
    }
    matched
}
