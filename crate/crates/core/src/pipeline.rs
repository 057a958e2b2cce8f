//! Routing of classified CLUs through the three phases, and the report files.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dictionary::{classify_ulc, UlcKind};
use crate::extraction::{SourceUlc, UlcPattern};
use crate::generation::{generate_candidates, CandidateTranslation, Origin};
use crate::oracle::{OracleError, SearchOracle};
use crate::phase1::{validate_by_frequency, write_verdict_log, FrequencyVerdict, Phase1Config};
use crate::phase2::{validate_candidates, Funnel, Phase2Config, WorldContext};
use crate::phase3::{run_phase3, write_mined_log, MinedCandidate, Phase3Config};

/// Terminal state of a CLU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Dictionary,
    Phase1,
    Phase2,
    Phase3Cognate,
    Phase3Pair,
    Untranslated,
    UnresolvedOracle,
}

impl Phase {
    pub const ALL: [Phase; 7] = [
        Phase::Dictionary,
        Phase::Phase1,
        Phase::Phase2,
        Phase::Phase3Cognate,
        Phase::Phase3Pair,
        Phase::Untranslated,
        Phase::UnresolvedOracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Dictionary => "DICTIONARY",
            Phase::Phase1 => "PHASE1",
            Phase::Phase2 => "PHASE2",
            Phase::Phase3Cognate => "PHASE3_COGNATE",
            Phase::Phase3Pair => "PHASE3_PAIR",
            Phase::Untranslated => "UNTRANSLATED",
            Phase::UnresolvedOracle => "UNRESOLVED_ORACLE",
        }
    }

    pub fn is_translated(self) -> bool {
        !matches!(self, Phase::Untranslated | Phase::UnresolvedOracle)
    }

    /// Summary column: dictionary hits count with phase 1, both phase-3
    /// sub-steps with phase 3.
    pub fn summary_column(self) -> Option<u8> {
        match self {
            Phase::Dictionary | Phase::Phase1 => Some(1),
            Phase::Phase2 => Some(2),
            Phase::Phase3Cognate | Phase::Phase3Pair => Some(3),
            Phase::Untranslated | Phase::UnresolvedOracle => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown phase {0:?}")]
pub struct UnknownPhase(pub String);

impl FromStr for Phase {
    type Err = UnknownPhase;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phase::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| UnknownPhase(s.to_string()))
    }
}

/// Phase a CLU enters the cascade at.
pub fn entry_phase(kind: UlcKind) -> u8 {
    match kind {
        UlcKind::NonPolysemous => 1,
        UlcKind::Polysemous => 2,
        UlcKind::Unknown => 3,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationRecord {
    pub source: SourceUlc,
    pub class: UlcKind,
    pub translation: Option<String>,
    pub phase: Phase,
    /// Scores of the accepted candidate plus per-phase tallies.
    pub scores: BTreeMap<String, f64>,
    pub error: Option<String>,
}

impl TranslationRecord {
    fn new(source: &SourceUlc, class: UlcKind) -> Self {
        TranslationRecord {
            source: source.clone(),
            class,
            translation: None,
            phase: Phase::Untranslated,
            scores: BTreeMap::new(),
            error: None,
        }
    }

    fn accept(&mut self, cand: &CandidateTranslation, phase: Phase) {
        self.translation = Some(cand.target_surface.clone());
        self.phase = phase;
        self.scores.extend(cand.scores.iter().map(|(k, v)| (k.clone(), *v)));
    }

    fn unresolved(&mut self, e: &OracleError) {
        log::warn!("{}: {e}", self.source.surface);
        self.translation = None;
        self.phase = Phase::UnresolvedOracle;
        self.error = Some(e.to_string());
    }

    /// `key=value` pairs joined by `;`, keys sorted.
    pub fn score_summary(&self) -> String {
        if self.scores.is_empty() {
            return "-".to_string();
        }
        self.scores
            .iter()
            .map(|(k, v)| format!("{k}={}", format_score(*v)))
            .collect::<Vec<_>>()
            .join(";")
    }
}

fn format_score(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.4}")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineConfig {
    pub phase1: Phase1Config,
    pub phase2: Phase2Config,
    pub phase3: Phase3Config,
    /// Process only CLUs entering at this phase, and run only that phase.
    pub only_phase: Option<u8>,
}

#[derive(Debug, Clone, Default)]
pub struct TranslationReport {
    pub backend: String,
    /// Sorted by source surface.
    pub records: Vec<TranslationRecord>,
    pub verdicts: Vec<FrequencyVerdict>,
    pub mined: Vec<MinedCandidate>,
    /// Phase-2 candidate funnel summed over CLUs that entered phase 2.
    pub phase2_funnel: Funnel,
}

struct UnitResult {
    record: TranslationRecord,
    verdicts: Vec<FrequencyVerdict>,
    mined: Vec<MinedCandidate>,
    funnel: Option<Funnel>,
}

fn process(
    ulc: &SourceUlc,
    oracle: &SearchOracle,
    ctx: &WorldContext<'_>,
    config: &PipelineConfig,
) -> Option<UnitResult> {
    let class = classify_ulc(ulc, ctx.dict);
    let entry = entry_phase(class.kind);
    let dictionary_hit = class.dictionary_translation.is_some();
    match config.only_phase {
        // dictionary hits are reported with phase 1
        Some(1) if dictionary_hit => {}
        Some(n) if n != entry || dictionary_hit => return None,
        _ => {}
    }
    let runs = |phase: u8| match config.only_phase {
        Some(n) => n == phase,
        None => entry <= phase,
    };

    let mut res = UnitResult {
        record: TranslationRecord::new(ulc, class.kind),
        verdicts: Vec::new(),
        mined: Vec::new(),
        funnel: None,
    };
    let rec = &mut res.record;

    if let Some(t) = class.dictionary_translation {
        let cand = CandidateTranslation::mined(&ulc.surface, &t, Origin::Dictionary);
        rec.accept(&cand, Phase::Dictionary);
        return Some(res);
    }

    let generated = if entry <= 2 {
        generate_candidates(ulc, ctx.dict).unwrap_or_default()
    } else {
        Vec::new()
    };
    // candidate failures that leave the unit undecided if no later phase succeeds
    let mut pending: Option<OracleError> = None;

    if runs(1) && entry == 1 {
        match validate_by_frequency(&generated, oracle, &config.phase1) {
            Ok(out) => {
                rec.scores.insert("phase1.candidates".into(), generated.len() as f64);
                res.verdicts = out.verdicts;
                if let Some(c) = out.accepted {
                    rec.accept(&c, Phase::Phase1);
                    return Some(res);
                }
            }
            Err(e) => {
                rec.unresolved(&e);
                return Some(res);
            }
        }
    }

    if runs(2) && entry <= 2 {
        match validate_candidates(generated, ulc, oracle, ctx, &config.phase2) {
            Ok(out) => {
                res.funnel = Some(out.funnel);
                rec.scores.insert("phase2.candidates".into(), out.funnel.candidates as f64);
                if let Some(c) = &out.selected {
                    rec.accept(c, Phase::Phase2);
                    return Some(res);
                }
                if let Some((_, e)) = out.unresolved.first() {
                    pending = Some(e.clone());
                }
            }
            Err(e) => {
                rec.unresolved(&e);
                return Some(res);
            }
        }
    }

    if runs(3) {
        match run_phase3(ulc, oracle, ctx, &config.phase2, &config.phase3) {
            Ok(out) => {
                rec.scores.insert("phase3.snippets".into(), out.snippet_count as f64);
                res.mined = out.mined.clone();
                if let Some(c) = out.selected() {
                    let phase = match c.origin {
                        Origin::Cognate => Phase::Phase3Cognate,
                        _ => Phase::Phase3Pair,
                    };
                    rec.accept(c, phase);
                    return Some(res);
                }
                if pending.is_none() {
                    pending = [&out.cognate, &out.pairs]
                        .into_iter()
                        .flatten()
                        .find_map(|o| o.unresolved.first().map(|(_, e)| e.clone()));
                }
            }
            Err(e) => {
                rec.unresolved(&e);
                return Some(res);
            }
        }
    }

    if let Some(e) = pending {
        rec.unresolved(&e);
    }
    Some(res)
}

fn record_order(a: &SourceUlc, b: &SourceUlc) -> std::cmp::Ordering {
    a.surface
        .cmp(&b.surface)
        .then_with(|| a.key().cmp(&b.key()))
}

/// Classifies every CLU, runs the cascade in parallel and assembles the report
/// in source-surface order.
pub fn run_pipeline(
    ulcs: &[SourceUlc],
    oracle: &SearchOracle,
    ctx: &WorldContext<'_>,
    config: &PipelineConfig,
) -> TranslationReport {
    let mut results: Vec<UnitResult> = ulcs
        .par_iter()
        .filter_map(|u| process(u, oracle, ctx, config))
        .collect();
    results.sort_by(|a, b| record_order(&a.record.source, &b.record.source));

    let mut report = TranslationReport {
        backend: oracle.backend_name().to_string(),
        ..TranslationReport::default()
    };
    for r in results {
        if let Some(f) = r.funnel {
            report.phase2_funnel.candidates += f.candidates;
            report.phase2_funnel.after_pair += f.after_pair;
            report.phase2_funnel.after_ratio += f.after_ratio;
            report.phase2_funnel.validated += f.validated;
        }
        report.verdicts.extend(r.verdicts);
        report.mined.extend(r.mined);
        report.records.push(r.record);
    }
    report
}

impl TranslationReport {
    pub fn count(&self, phase: Phase) -> usize {
        self.records.iter().filter(|r| r.phase == phase).count()
    }

    pub fn translated(&self) -> usize {
        self.records.iter().filter(|r| r.phase.is_translated()).count()
    }

    pub fn has_unresolved(&self) -> bool {
        self.records.iter().any(|r| r.phase == Phase::UnresolvedOracle)
    }

    pub fn lexicon_entries(&self) -> Vec<LexiconEntry> {
        self.records
            .iter()
            .map(|r| LexiconEntry {
                source: r.source.surface.clone(),
                translation: r.translation.clone(),
                phase: r.phase,
            })
            .collect()
    }

    pub fn write_lexicon<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                r.source.surface,
                r.translation.as_deref().unwrap_or("-"),
                r.phase,
                r.score_summary()
            )?;
        }
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let translated = self.translated();
        let pct = |n: usize, d: usize| if d == 0 { 0.0 } else { 100.0 * n as f64 / d as f64 };

        writeln!(w, "backend\t{}", self.backend)?;
        writeln!(w, "units\t{}", self.records.len())?;
        writeln!(w, "translated\t{translated}")?;
        writeln!(w)?;
        writeln!(w, "# translations per phase")?;
        for col in 1..=3u8 {
            let n = self
                .records
                .iter()
                .filter(|r| r.phase.summary_column() == Some(col))
                .count();
            writeln!(w, "phase{col}\t{n}\t{:.2}%", pct(n, translated))?;
        }
        writeln!(w)?;
        writeln!(w, "# records per state")?;
        for p in Phase::ALL {
            writeln!(w, "{p}\t{}", self.count(p))?;
        }
        writeln!(w)?;
        writeln!(w, "# per pattern: units, translated")?;
        for pat in UlcPattern::ALL {
            let rows: Vec<_> = self.records.iter().filter(|r| r.source.pattern == pat).collect();
            let done = rows.iter().filter(|r| r.phase.is_translated()).count();
            writeln!(w, "{pat}\t{}\t{done}", rows.len())?;
        }
        writeln!(w)?;
        writeln!(w, "# phase 1 candidates per pattern: generated, kept")?;
        for pat in UlcPattern::ALL {
            let rows: Vec<_> = self
                .verdicts
                .iter()
                .filter(|v| {
                    self.records
                        .iter()
                        .any(|r| r.source.surface == v.candidate.source && r.source.pattern == pat)
                })
                .collect();
            let kept = rows.iter().filter(|v| v.accepted).count();
            writeln!(w, "{pat}\t{}\t{kept}", rows.len())?;
        }
        writeln!(w)?;
        let f = &self.phase2_funnel;
        writeln!(w, "# phase 2 funnel")?;
        writeln!(w, "candidates\t{}", f.candidates)?;
        writeln!(w, "after_pair\t{}", f.after_pair)?;
        writeln!(w, "after_ratio\t{}", f.after_ratio)?;
        writeln!(w, "validated\t{}", f.validated)?;
        Ok(())
    }

    /// Writes `lexicon.tsv`, `summary.txt`, `verdicts.tsv` and `mined.tsv`.
    pub fn write_report(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let create = |name: &str| fs::File::create(dir.join(name)).map(BufWriter::new);
        let mut f = create("lexicon.tsv")?;
        self.write_lexicon(&mut f)?;
        f.flush()?;
        let mut f = create("summary.txt")?;
        self.write_summary(&mut f)?;
        f.flush()?;
        let mut f = create("verdicts.tsv")?;
        write_verdict_log(&mut f, &self.verdicts)?;
        f.flush()?;
        let mut f = create("mined.tsv")?;
        write_mined_log(&mut f, &self.mined)?;
        f.flush()
    }
}

/// One line of a lexicon file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub source: String,
    pub translation: Option<String>,
    pub phase: Phase,
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconFileError {
    #[error("lexicon line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads `source<TAB>translation<TAB>phase[<TAB>scores]` lines.
pub fn read_lexicon<R: BufRead>(reader: R) -> Result<Vec<LexiconEntry>, LexiconFileError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let malformed = |reason: String| LexiconFileError::Malformed {
            line: idx + 1,
            reason,
        };
        if f.len() < 3 {
            return Err(malformed("expected at least 3 fields".into()));
        }
        let phase: Phase = f[2].parse().map_err(|e: UnknownPhase| malformed(e.to_string()))?;
        let translation = (f[1] != "-").then(|| f[1].to_string());
        if translation.is_some() != phase.is_translated() {
            return Err(malformed(format!("translation does not agree with phase {phase}")));
        }
        out.push(LexiconEntry {
            source: f[0].to_string(),
            translation,
            phase,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{load_dictionary, BilingualDictionary};
    use crate::oracle::{FixtureBackend, OracleQuery, PhraseSet, ResponseCache};
    use crate::phase2::LanguageKit;
    use crate::tagger::LexiconTagger;
    use crate::text::StopWords;

    fn with_ctx<T>(dict: &BilingualDictionary, f: impl FnOnce(&WorldContext<'_>) -> T) -> T {
        let tagger = LexiconTagger::default();
        let stop = StopWords::default();
        let ctx = WorldContext {
            source: LanguageKit { lang: "fr", tagger: &tagger, stopwords: &stop },
            target: LanguageKit { lang: "en", tagger: &tagger, stopwords: &stop },
            dict,
        };
        f(&ctx)
    }

    fn messe_fixture() -> FixtureBackend {
        FixtureBackend::new()
            .with_count(&OracleQuery::phrase_count("mass"), 764_000_000)
            .with_count(
                &OracleQuery::count_of(PhraseSet::any_of(["the midnight mass", "a midnight mass"])),
                336_000,
            )
            .with_count(
                &OracleQuery::count_of(PhraseSet::any_of(["the mass of midnight", "a mass of midnight"])),
                65,
            )
    }

    #[test]
    fn routes_and_records() {
        let dict = load_dictionary(
            "messe\tNOUN\tmass\nminuit\tNOUN\tmidnight\ncaisse\tNOUN\tdrum|fund\n\
             clair\tADJ\tclear\ncaisse_clair\tNOUN\tsnare drum\n"
                .as_bytes(),
        )
        .unwrap();
        let ulcs = vec![
            SourceUlc::new("messe", "minuit", UlcPattern::NounDeNoun, "messe de minuit"),
            SourceUlc::new("caisse", "clair", UlcPattern::NounAdj, "caisse claire"),
            // phase 3 with no fixture entry: oracle failure
            SourceUlc::new("souris", "agneau", UlcPattern::NounDNoun, "souris d'agneau"),
        ];
        let oracle = SearchOracle::new(Box::new(messe_fixture()), ResponseCache::in_memory());
        let report = with_ctx(&dict, |ctx| run_pipeline(&ulcs, &oracle, ctx, &PipelineConfig::default()));
        let phases: Vec<_> = report
            .records
            .iter()
            .map(|r| (r.source.surface.as_str(), r.translation.as_deref(), r.phase))
            .collect();
        assert_eq!(
            phases,
            [
                ("caisse claire", Some("snare drum"), Phase::Dictionary),
                ("messe de minuit", Some("midnight mass"), Phase::Phase1),
                ("souris d'agneau", None, Phase::UnresolvedOracle),
            ]
        );
        assert!(report.has_unresolved());
        assert_eq!(report.verdicts.len(), 2);

        let mut buf = Vec::new();
        report.write_summary(&mut buf).unwrap();
        let summary = String::from_utf8(buf).unwrap();
        assert!(summary.contains("phase1\t2\t100.00%"));
        assert!(summary.contains("UNRESOLVED_ORACLE\t1"));
    }

    #[test]
    fn phase_restriction() {
        let dict = load_dictionary("messe\tNOUN\tmass\nminuit\tNOUN\tmidnight\n".as_bytes()).unwrap();
        let ulcs = vec![
            SourceUlc::new("messe", "minuit", UlcPattern::NounDeNoun, "messe de minuit"),
            SourceUlc::new("souris", "agneau", UlcPattern::NounDNoun, "souris d'agneau"),
        ];
        let oracle = SearchOracle::new(Box::new(messe_fixture()), ResponseCache::in_memory());
        let config = PipelineConfig {
            only_phase: Some(1),
            ..PipelineConfig::default()
        };
        let report = with_ctx(&dict, |ctx| run_pipeline(&ulcs, &oracle, ctx, &config));
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.records[0].phase, Phase::Phase1);
    }

    #[test]
    fn empty_input_gives_zeroed_report() {
        let dict = BilingualDictionary::new();
        let oracle = SearchOracle::offline(ResponseCache::in_memory());
        let report = with_ctx(&dict, |ctx| run_pipeline(&[], &oracle, ctx, &PipelineConfig::default()));
        let dir = tempfile::tempdir().unwrap();
        report.write_report(dir.path()).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("lexicon.tsv")).unwrap(), "");
        let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
        assert!(summary.contains("units\t0"));
        assert!(summary.contains("phase1\t0\t0.00%"));
    }

    #[test]
    fn lexicon_round_trip() {
        let text = "caisse claire\tsnare drum\tDICTIONARY\t-\nsouris d'agneau\t-\tUNTRANSLATED\t-\n";
        let entries = read_lexicon(text.as_bytes()).unwrap();
        assert_eq!(entries[0].translation.as_deref(), Some("snare drum"));
        assert_eq!(entries[1].phase, Phase::Untranslated);
        assert!(read_lexicon("a\t-\tPHASE1\n".as_bytes()).is_err());
        assert!(read_lexicon("a\tb\tPHASE9\n".as_bytes()).is_err());
    }

    #[test]
    fn score_formatting() {
        let mut r = TranslationRecord::new(
            &SourceUlc::new("a", "b", UlcPattern::NounAdj, "a b"),
            UlcKind::Unknown,
        );
        assert_eq!(r.score_summary(), "-");
        r.scores.insert("x".into(), 3.0);
        r.scores.insert("a".into(), 1.0 / 3.0);
        assert_eq!(r.score_summary(), "a=0.3333;x=3");
    }
}
