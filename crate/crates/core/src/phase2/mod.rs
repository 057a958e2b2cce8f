//! Disambiguation of candidates for CLUs with a polysemous constituent:
//! pair-document filter, frequency-ratio filter, then lexical-world
//! comparison.

mod world;

use std::collections::HashSet;

use rayon::prelude::*;

use crate::dictionary::BilingualDictionary;
use crate::extraction::SourceUlc;
use crate::generation::CandidateTranslation;
use crate::oracle::{OracleError, PhraseSet, SearchOracle};

pub use world::{
    build_lexical_world, compare_worlds, world_from_snippets, LanguageKit, LexicalWorld,
    WorldSimilarity, SNIPPET_LIMIT, WORLD_SIZE,
};

pub const SCORE_PAIR: &str = "phase2.pair_count";
pub const SCORE_COUNT: &str = "phase2.count";
pub const SCORE_SOURCE_COUNT: &str = "phase2.source_count";
pub const SCORE_NOUN: &str = "phase2.noun_jaccard";
pub const SCORE_ADJ: &str = "phase2.adj_jaccard";

#[derive(Debug, Clone, PartialEq)]
pub struct Phase2Config {
    pub noun_jaccard_min: f64,
    pub adj_jaccard_min: f64,
    /// Keep only the k candidates with the highest pair counts.
    pub pair_top_k: Option<usize>,
    pub snippet_limit: usize,
    pub world_size: usize,
}

impl Default for Phase2Config {
    fn default() -> Self {
        Phase2Config {
            noun_jaccard_min: 0.05,
            adj_jaccard_min: 0.05,
            pair_top_k: None,
            snippet_limit: SNIPPET_LIMIT,
            world_size: WORLD_SIZE,
        }
    }
}

/// Candidates that passed a filter, and those whose oracle query failed.
#[derive(Debug, Clone, Default)]
pub struct FilterResult {
    pub survivors: Vec<CandidateTranslation>,
    pub unresolved: Vec<(CandidateTranslation, OracleError)>,
}

/// Keeps candidates co-occurring with the source phrase in at least one
/// document.
pub fn parallel_pair_filter(
    cands: Vec<CandidateTranslation>,
    oracle: &SearchOracle,
    top_k: Option<usize>,
) -> FilterResult {
    let judged: Vec<_> = cands
        .into_par_iter()
        .map(|mut c| match oracle.pair_count(&c.source, &c.target_surface) {
            Ok(n) => {
                c.scores.insert(SCORE_PAIR.into(), n as f64);
                Ok((c, n))
            }
            Err(e) => Err((c, e)),
        })
        .collect();

    let mut out = FilterResult::default();
    let mut kept = Vec::new();
    for j in judged {
        match j {
            Ok((c, n)) if n >= 1 => kept.push((c, n)),
            Ok(_) => {}
            Err(u) => out.unresolved.push(u),
        }
    }
    if let Some(k) = top_k {
        // stable: equal counts keep generation order
        kept.sort_by_key(|k| std::cmp::Reverse(k.1));
        kept.truncate(k);
    }
    out.survivors = kept.into_iter().map(|(c, _)| c).collect();
    out
}

/// Drops candidates whose exact-phrase count is below the source count.
pub fn ratio_filter(
    cands: Vec<CandidateTranslation>,
    source_count: u64,
    oracle: &SearchOracle,
) -> FilterResult {
    let judged: Vec<_> = cands
        .into_par_iter()
        .map(|mut c| match oracle.phrase_count(PhraseSet::single(&c.target_surface)) {
            Ok(n) => {
                c.scores.insert(SCORE_COUNT.into(), n as f64);
                c.scores.insert(SCORE_SOURCE_COUNT.into(), source_count as f64);
                Ok((c, n))
            }
            Err(e) => Err((c, e)),
        })
        .collect();

    let mut out = FilterResult::default();
    for j in judged {
        match j {
            Ok((c, n)) if n >= source_count => out.survivors.push(c),
            Ok(_) => {}
            Err(u) => out.unresolved.push(u),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub candidate: CandidateTranslation,
    pub similarity: WorldSimilarity,
}

impl ScoredCandidate {
    fn phrase_count(&self) -> f64 {
        self.candidate.score(SCORE_COUNT).unwrap_or(0.0)
    }
}

/// Best candidate meeting both per-category thresholds, by mean Jaccard, then
/// phrase count, then target text.
pub fn select_translation(
    scored: &[ScoredCandidate],
    noun_min: f64,
    adj_min: f64,
) -> Option<&ScoredCandidate> {
    scored
        .iter()
        .filter(|s| s.similarity.noun_jaccard >= noun_min && s.similarity.adj_jaccard >= adj_min)
        .min_by(|a, b| {
            b.similarity
                .combined()
                .total_cmp(&a.similarity.combined())
                .then_with(|| b.phrase_count().total_cmp(&a.phrase_count()))
                .then_with(|| a.candidate.target_surface.cmp(&b.candidate.target_surface))
        })
}

/// Resources for lexical-world comparison between the two languages.
pub struct WorldContext<'a> {
    pub source: LanguageKit<'a>,
    pub target: LanguageKit<'a>,
    pub dict: &'a BilingualDictionary,
}

/// How many candidates each step kept.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Funnel {
    pub candidates: usize,
    pub after_pair: usize,
    pub after_ratio: usize,
    pub validated: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationOutcome {
    pub selected: Option<CandidateTranslation>,
    pub funnel: Funnel,
    pub scored: Vec<ScoredCandidate>,
    pub unresolved: Vec<(CandidateTranslation, OracleError)>,
    pub source_world: Option<LexicalWorld>,
}

impl ValidationOutcome {
    /// No translation, and at least one candidate could not be judged.
    pub fn needs_retry(&self) -> bool {
        self.selected.is_none() && !self.unresolved.is_empty()
    }
}

/// Constituent lemmas and surface words of a source unit.
pub fn source_exclusions(ulc: &SourceUlc) -> HashSet<String> {
    let mut set: HashSet<String> = ulc.surface_tokens().into_iter().collect();
    set.insert(ulc.head_lemma.to_lowercase());
    set.insert(ulc.modifier_lemma.to_lowercase());
    set
}

fn target_exclusions(phrase: &str, kit: &LanguageKit<'_>) -> HashSet<String> {
    let mut set: HashSet<String> = crate::text::tokenize(phrase).into_iter().collect();
    set.extend(kit.tagger.tag(phrase).into_iter().map(|w| w.lemma));
    set
}

/// Source-side oracle count: the value recorded at extraction, or a fresh
/// exact-phrase query.
pub fn source_count(ulc: &SourceUlc, oracle: &SearchOracle) -> Result<u64, OracleError> {
    match ulc.oracle_literal_freq {
        Some(n) => Ok(n),
        None => oracle.phrase_count(PhraseSet::single(&ulc.surface)),
    }
}

/// Pair filter, ratio filter, world comparison and selection, shared by the
/// compositional and mined paths. A failure to obtain the source count or the
/// source world is returned as an error; per-candidate failures are recorded
/// in the outcome.
pub fn validate_candidates(
    cands: Vec<CandidateTranslation>,
    ulc: &SourceUlc,
    oracle: &SearchOracle,
    ctx: &WorldContext<'_>,
    config: &Phase2Config,
) -> Result<ValidationOutcome, OracleError> {
    let mut out = ValidationOutcome {
        funnel: Funnel {
            candidates: cands.len(),
            ..Funnel::default()
        },
        ..ValidationOutcome::default()
    };
    if cands.is_empty() {
        return Ok(out);
    }

    let paired = parallel_pair_filter(cands, oracle, config.pair_top_k);
    out.unresolved.extend(paired.unresolved);
    out.funnel.after_pair = paired.survivors.len();
    if paired.survivors.is_empty() {
        return Ok(out);
    }

    let src_count = source_count(ulc, oracle)?;
    let ratioed = ratio_filter(paired.survivors, src_count, oracle);
    out.unresolved.extend(ratioed.unresolved);
    out.funnel.after_ratio = ratioed.survivors.len();
    if ratioed.survivors.is_empty() {
        return Ok(out);
    }

    let src_world = build_lexical_world(
        &ulc.surface,
        &ctx.source,
        oracle,
        &source_exclusions(ulc),
        config.snippet_limit,
        config.world_size,
    )?;

    let scored: Vec<Result<ScoredCandidate, (CandidateTranslation, OracleError)>> = ratioed
        .survivors
        .into_par_iter()
        .map(|mut c| {
            let exclude = target_exclusions(&c.target_surface, &ctx.target);
            match build_lexical_world(
                &c.target_surface,
                &ctx.target,
                oracle,
                &exclude,
                config.snippet_limit,
                config.world_size,
            ) {
                Ok(tgt) => {
                    let similarity = compare_worlds(&src_world, &tgt, ctx.dict);
                    c.scores.insert(SCORE_NOUN.into(), similarity.noun_jaccard);
                    c.scores.insert(SCORE_ADJ.into(), similarity.adj_jaccard);
                    Ok(ScoredCandidate {
                        candidate: c,
                        similarity,
                    })
                }
                Err(e) => Err((c, e)),
            }
        })
        .collect();
    for s in scored {
        match s {
            Ok(s) => out.scored.push(s),
            Err(u) => out.unresolved.push(u),
        }
    }

    let best = select_translation(&out.scored, config.noun_jaccard_min, config.adj_jaccard_min);
    out.funnel.validated = usize::from(best.is_some());
    out.selected = best.map(|s| s.candidate.clone());
    out.source_world = Some(src_world);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::load_dictionary;
    use crate::extraction::UlcPattern;
    use crate::generation::{generate_candidates, Origin};
    use crate::oracle::{FixtureBackend, OracleQuery, OracleResponse, ResponseCache, Snippet};
    use crate::tagger::LexiconTagger;
    use crate::text::StopWords;

    fn cand(source: &str, target: &str) -> CandidateTranslation {
        CandidateTranslation::mined(source, target, Origin::Generated)
    }

    fn oracle(f: FixtureBackend) -> SearchOracle {
        SearchOracle::new(Box::new(f), ResponseCache::in_memory())
    }

    #[test]
    fn pair_filter_threshold() {
        let f = FixtureBackend::new()
            .with_count(&OracleQuery::pair_count("caisse centrale", "central fund"), 4)
            .with_count(&OracleQuery::pair_count("caisse centrale", "central drum"), 0);
        let r = parallel_pair_filter(
            vec![cand("caisse centrale", "central fund"), cand("caisse centrale", "central drum")],
            &oracle(f),
            None,
        );
        assert_eq!(r.survivors.len(), 1);
        assert_eq!(r.survivors[0].target_surface, "central fund");
        assert_eq!(r.survivors[0].score(SCORE_PAIR), Some(4.0));
        assert!(parallel_pair_filter(vec![], &oracle(FixtureBackend::new()), None)
            .survivors
            .is_empty());
    }

    #[test]
    fn pair_filter_failure_is_recorded_not_dropped_silently() {
        let r = parallel_pair_filter(vec![cand("a", "b")], &oracle(FixtureBackend::new()), None);
        assert!(r.survivors.is_empty());
        assert_eq!(r.unresolved.len(), 1);
    }

    #[test]
    fn pair_top_k() {
        let f = FixtureBackend::new()
            .with_count(&OracleQuery::pair_count("s", "a"), 3)
            .with_count(&OracleQuery::pair_count("s", "b"), 9)
            .with_count(&OracleQuery::pair_count("s", "c"), 5);
        let r = parallel_pair_filter(
            vec![cand("s", "a"), cand("s", "b"), cand("s", "c")],
            &oracle(f),
            Some(2),
        );
        let t: Vec<_> = r.survivors.iter().map(|c| c.target_surface.as_str()).collect();
        assert_eq!(t, ["b", "c"]);
    }

    #[test]
    fn retirement_fund_survives_ratio() {
        let f = FixtureBackend::new()
            .with_count(&OracleQuery::phrase_count("retirement fund"), 1_240_000)
            .with_count(&OracleQuery::phrase_count("retirement case"), 2_850)
            .with_count(&OracleQuery::phrase_count("retirement drum"), 157_000);
        let r = ratio_filter(
            vec![
                cand("caisse de retraite", "retirement fund"),
                cand("caisse de retraite", "retirement case"),
                cand("caisse de retraite", "retirement drum"),
            ],
            157_000,
            &oracle(f),
        );
        let t: Vec<_> = r.survivors.iter().map(|c| c.target_surface.as_str()).collect();
        assert_eq!(t, ["retirement fund", "retirement drum"]);
    }

    fn scored(target: &str, noun: f64, adj: f64, count: f64) -> ScoredCandidate {
        let mut c = cand("s", target);
        c.scores.insert(SCORE_COUNT.into(), count);
        ScoredCandidate {
            candidate: c,
            similarity: WorldSimilarity {
                noun_jaccard: noun,
                adj_jaccard: adj,
                matched_nouns: vec![],
                matched_adjs: vec![],
            },
        }
    }

    #[test]
    fn selection() {
        let s = [scored("a", 0.2, 0.2, 1.0), scored("b", 0.35, 0.35, 1.0)];
        assert_eq!(select_translation(&s, 0.0, 0.0).unwrap().candidate.target_surface, "b");
        assert!(select_translation(&s, 0.5, 0.0).is_none());
        // adjective score below its own threshold disqualifies despite a high mean
        let s = [scored("a", 0.9, 0.01, 1.0), scored("b", 0.1, 0.1, 1.0)];
        assert_eq!(select_translation(&s, 0.05, 0.05).unwrap().candidate.target_surface, "b");
        let s = [scored("a", 0.3, 0.3, 10.0), scored("b", 0.3, 0.3, 20.0)];
        assert_eq!(select_translation(&s, 0.0, 0.0).unwrap().candidate.target_surface, "b");
    }

    fn snippets(texts: &[&str]) -> OracleResponse {
        OracleResponse::Snippets(texts.iter().map(|t| Snippet::new(*t)).collect())
    }

    #[test]
    fn full_validation_picks_the_fund() {
        let dict = load_dictionary(
            "caisse\tNOUN\tfund|case|drum\nretraite\tNOUN\tretirement\npension\tNOUN\tpension\n\
             épargne\tNOUN\tsavings\nâgé\tADJ\telderly\nmusique\tNOUN\tmusic\n"
                .as_bytes(),
        )
        .unwrap();
        let ulc = SourceUlc::new("caisse", "retraite", UlcPattern::NounDeNoun, "caisse de retraite");
        let cands: Vec<_> = generate_candidates(&ulc, &dict)
            .unwrap()
            .into_iter()
            .filter(|c| c.rule == Some(crate::generation::TransformRule::N2N1))
            .collect();

        let mut f = FixtureBackend::new().with_count(&OracleQuery::phrase_count("caisse de retraite"), 157_000);
        for (t, pair, count) in [
            ("retirement fund", 40, 1_240_000),
            ("retirement case", 3, 2_850),
            ("retirement drum", 2, 200_000),
        ] {
            f = f
                .with_count(&OracleQuery::pair_count("caisse de retraite", t), pair)
                .with_count(&OracleQuery::phrase_count(t), count);
        }
        f = f
            .with(
                &OracleQuery::snippets("caisse de retraite", Some("fr"), SNIPPET_LIMIT),
                snippets(&["pension et épargne des personnes âgées", "la pension âgé"]),
            )
            .with(
                &OracleQuery::snippets("retirement fund", Some("en"), SNIPPET_LIMIT),
                snippets(&["pension savings for elderly people"]),
            )
            .with(
                &OracleQuery::snippets("retirement drum", Some("en"), SNIPPET_LIMIT),
                snippets(&["music"]),
            );

        let fr = LexiconTagger::parse("pension\tNOUN\népargne\tNOUN\nâgé\tADJ\nâgées\tADJ\tâgé\n").unwrap();
        let en = LexiconTagger::parse("pension\tNOUN\nsavings\tNOUN\nelderly\tADJ\nmusic\tNOUN\n").unwrap();
        let stop = StopWords::default();
        let ctx = WorldContext {
            source: LanguageKit { lang: "fr", tagger: &fr, stopwords: &stop },
            target: LanguageKit { lang: "en", tagger: &en, stopwords: &stop },
            dict: &dict,
        };
        let out = validate_candidates(cands, &ulc, &oracle(f), &ctx, &Phase2Config::default()).unwrap();
        assert_eq!(
            out.funnel,
            Funnel { candidates: 3, after_pair: 3, after_ratio: 2, validated: 1 }
        );
        let sel = out.selected.unwrap();
        assert_eq!(sel.target_surface, "retirement fund");
        assert_eq!(sel.score(SCORE_NOUN), Some(1.0));
        assert!(out.unresolved.is_empty());
    }
}
