//! Frequency validation of candidates for CLUs whose constituents each have a
//! single dictionary translation.

use std::cmp::Ordering;
use std::io::Write;

use crate::generation::{build_validation_queries, CandidateTranslation, GenerationError};
use crate::oracle::{OracleError, PhraseSet, SearchOracle};

pub const DEFAULT_DIVISOR: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Phase1Config {
    /// Threshold = head target count / divisor (floor).
    pub divisor: u64,
    pub use_an: bool,
}

impl Default for Phase1Config {
    fn default() -> Self {
        Phase1Config {
            divisor: DEFAULT_DIVISOR,
            use_an: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVerdict {
    pub candidate: CandidateTranslation,
    pub candidate_count: u64,
    pub head_target_count: u64,
    pub threshold: u64,
    pub accepted: bool,
}

impl FrequencyVerdict {
    pub fn judge(
        candidate: CandidateTranslation,
        candidate_count: u64,
        head_target_count: u64,
        divisor: u64,
    ) -> Self {
        let threshold = head_target_count / divisor.max(1);
        // a phrase never seen cannot be validated, even against a zero threshold
        let accepted = candidate_count > 0 && candidate_count >= threshold;
        FrequencyVerdict {
            candidate,
            candidate_count,
            head_target_count,
            threshold,
            accepted,
        }
    }

    /// `source, candidate, rule, head_target, candidate_count, head_target_count, threshold, accepted`
    pub fn log_line(&self) -> String {
        let c = &self.candidate;
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            c.source,
            c.target_surface,
            c.rule.map_or("-", |r| r.as_str()),
            c.head_target.as_deref().unwrap_or("-"),
            self.candidate_count,
            self.head_target_count,
            self.threshold,
            self.accepted
        )
    }
}

pub const VERDICT_LOG_HEADER: &str =
    "source\tcandidate\trule\thead_target\tcandidate_count\thead_target_count\tthreshold\taccepted";

pub fn write_verdict_log<W: Write>(mut w: W, verdicts: &[FrequencyVerdict]) -> std::io::Result<()> {
    writeln!(w, "{VERDICT_LOG_HEADER}")?;
    for v in verdicts {
        writeln!(w, "{}", v.log_line())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phase1Outcome {
    pub accepted: Option<CandidateTranslation>,
    pub verdicts: Vec<FrequencyVerdict>,
}

/// Orders winners: higher count first, then rule priority, then target text.
fn rank(a: &FrequencyVerdict, b: &FrequencyVerdict) -> Ordering {
    let prio = |v: &FrequencyVerdict| v.candidate.rule.map_or(u8::MAX, |r| r.priority());
    b.candidate_count
        .cmp(&a.candidate_count)
        .then_with(|| prio(a).cmp(&prio(b)))
        .then_with(|| a.candidate.target_surface.cmp(&b.candidate.target_surface))
}

/// Picks the winner among already-judged verdicts.
pub fn select_winner(verdicts: &[FrequencyVerdict]) -> Option<&FrequencyVerdict> {
    verdicts.iter().filter(|v| v.accepted).min_by(|a, b| rank(a, b))
}

/// Compares each candidate's article-preceded count with its head noun's
/// count and returns the best accepted candidate, if any, with all verdicts.
pub fn validate_by_frequency(
    cands: &[CandidateTranslation],
    oracle: &SearchOracle,
    config: &Phase1Config,
) -> Result<Phase1Outcome, OracleError> {
    let mut verdicts = Vec::with_capacity(cands.len());
    for cand in cands {
        let query = build_validation_queries(cand, config.use_an).map_err(|e| match e {
            GenerationError::EmptyCandidate | GenerationError::MissingConstituent(_) => {
                OracleError::InvalidQuery(e.to_string())
            }
        })?;
        let candidate_count = oracle.count(&query)?;
        let head = cand
            .head_target
            .as_deref()
            .ok_or_else(|| OracleError::InvalidQuery(format!("no head target for {}", cand.target_surface)))?;
        let head_target_count = oracle.phrase_count(PhraseSet::single(head))?;

        let mut cand = cand.clone();
        cand.scores.insert("phase1.count".into(), candidate_count as f64);
        cand.scores.insert("phase1.head_count".into(), head_target_count as f64);
        verdicts.push(FrequencyVerdict::judge(
            cand,
            candidate_count,
            head_target_count,
            config.divisor,
        ));
    }
    let accepted = select_winner(&verdicts).map(|v| v.candidate.clone());
    Ok(Phase1Outcome { accepted, verdicts })
}
