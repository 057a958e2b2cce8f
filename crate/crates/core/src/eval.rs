//! Precision and recall of a lexicon against graded gold pairs.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::BufRead;
use std::str::FromStr;

use thiserror::Error;

use crate::pipeline::{LexiconEntry, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Grade {
    /// Good translation.
    A,
    /// Acceptable translation.
    B,
    /// Wrong translation.
    C,
}

impl Grade {
    pub fn is_acceptable(self) -> bool {
        matches!(self, Grade::A | Grade::B)
    }
}

impl FromStr for Grade {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Grade::A),
            "B" | "b" => Ok(Grade::B),
            "C" | "c" => Ok(Grade::C),
            other => Err(format!("unknown grade {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldAnnotation {
    pub source: String,
    pub translation: String,
    pub grade: Grade,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("{} translated pair(s) have no gold grade: {}", .0.len(), format_pairs(.0))]
    MissingGrades(Vec<(String, String)>),
    #[error("conflicting grades for {unit:?} -> {translation:?}")]
    Conflict { unit: String, translation: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(s, t)| format!("{s} -> {t}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Reads `source<TAB>translation<TAB>grade` lines.
pub fn read_gold<R: BufRead>(reader: R) -> Result<Vec<GoldAnnotation>, EvalError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |reason: String| EvalError::Malformed {
            line: idx + 1,
            reason,
        };
        let f: Vec<&str> = line.split('\t').collect();
        let [source, translation, grade] = f.as_slice() else {
            return Err(malformed("expected source<TAB>translation<TAB>grade".into()));
        };
        out.push(GoldAnnotation {
            source: source.to_string(),
            translation: translation.to_string(),
            grade: grade.parse().map_err(malformed)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub total_sources: usize,
    pub translated: usize,
    pub grades: BTreeMap<Grade, usize>,
    /// Per terminal state, counts per grade.
    pub per_phase: BTreeMap<Phase, BTreeMap<Grade, usize>>,
}

impl Metrics {
    pub fn grade(&self, g: Grade) -> usize {
        self.grades.get(&g).copied().unwrap_or(0)
    }

    pub fn acceptable(&self) -> usize {
        self.grade(Grade::A) + self.grade(Grade::B)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.acceptable(), self.translated)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.acceptable(), self.total_sources)
    }

    pub fn proportion(&self, g: Grade) -> f64 {
        ratio(self.grade(g), self.translated)
    }

    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "total_sources={}", self.total_sources);
        let _ = writeln!(s, "translated={}", self.translated);
        for g in [Grade::A, Grade::B, Grade::C] {
            let _ = writeln!(s, "grade_{g:?}={}", self.grade(g));
        }
        for g in [Grade::A, Grade::B, Grade::C] {
            let _ = writeln!(s, "proportion_{g:?}={:.6}", self.proportion(g));
        }
        let _ = writeln!(s, "precision={:.6}", self.precision());
        let _ = writeln!(s, "recall={:.6}", self.recall());
        for (phase, grades) in &self.per_phase {
            for g in [Grade::A, Grade::B, Grade::C] {
                let n = grades.get(&g).copied().unwrap_or(0);
                let _ = writeln!(s, "phase.{phase}.{g:?}={n}");
            }
        }
        s
    }

    pub fn to_table(&self) -> String {
        let pct = |x: f64| format!("{:6.2}%", 100.0 * x);
        let mut s = String::new();
        let _ = writeln!(s, "sources      {:>6}", self.total_sources);
        let _ = writeln!(s, "translated   {:>6}", self.translated);
        for g in [Grade::A, Grade::B, Grade::C] {
            let _ = writeln!(s, "grade {g:?}      {:>6}  {}", self.grade(g), pct(self.proportion(g)));
        }
        let _ = writeln!(s, "precision           {}", pct(self.precision()));
        let _ = writeln!(s, "recall              {}", pct(self.recall()));
        if !self.per_phase.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "{:<18} {:>5} {:>5} {:>5}", "phase", "A", "B", "C");
            for (phase, grades) in &self.per_phase {
                let n = |g| grades.get(&g).copied().unwrap_or(0);
                let _ = writeln!(
                    s,
                    "{:<18} {:>5} {:>5} {:>5}",
                    phase.as_str(),
                    n(Grade::A),
                    n(Grade::B),
                    n(Grade::C)
                );
            }
        }
        s
    }
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

/// Grades every translated entry by exact (source, translation) match.
/// `total_sources` is the size of the source sample, translated or not.
pub fn compute_metrics(
    entries: &[LexiconEntry],
    gold: &[GoldAnnotation],
    total_sources: usize,
) -> Result<Metrics, EvalError> {
    let mut index: HashMap<(&str, &str), Grade> = HashMap::new();
    for g in gold {
        let key = (g.source.as_str(), g.translation.as_str());
        if let Some(prev) = index.insert(key, g.grade) {
            if prev != g.grade {
                return Err(EvalError::Conflict {
                    unit: g.source.clone(),
                    translation: g.translation.clone(),
                });
            }
        }
    }

    let mut metrics = Metrics {
        total_sources,
        ..Metrics::default()
    };
    let mut missing = Vec::new();
    for e in entries {
        let Some(t) = &e.translation else { continue };
        match index.get(&(e.source.as_str(), t.as_str())) {
            Some(&grade) => {
                metrics.translated += 1;
                *metrics.grades.entry(grade).or_default() += 1;
                *metrics
                    .per_phase
                    .entry(e.phase)
                    .or_default()
                    .entry(grade)
                    .or_default() += 1;
            }
            None => missing.push((e.source.clone(), t.clone())),
        }
    }
    if !missing.is_empty() {
        return Err(EvalError::MissingGrades(missing));
    }
    Ok(metrics)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(s: &str, t: &str, phase: Phase) -> LexiconEntry {
        LexiconEntry {
            source: s.into(),
            translation: Some(t.into()),
            phase,
        }
    }

    fn gold(s: &str, t: &str, g: Grade) -> GoldAnnotation {
        GoldAnnotation {
            source: s.into(),
            translation: t.into(),
            grade: g,
        }
    }

    #[test]
    fn all_good() {
        let entries: Vec<_> = (0..10).map(|i| entry(&format!("s{i}"), "t", Phase::Phase1)).collect();
        let gold: Vec<_> = (0..10).map(|i| gold(&format!("s{i}"), "t", Grade::A)).collect();
        let m = compute_metrics(&entries, &gold, 10).unwrap();
        assert_eq!(m.precision(), 1.0);
        assert_eq!(m.recall(), 1.0);
    }

    #[test]
    fn toy_hand_scored() {
        // 4 translated of 6 sources: A, B, C, A
        let entries = vec![
            entry("a", "x", Phase::Phase1),
            entry("b", "y", Phase::Phase2),
            entry("c", "z", Phase::Phase2),
            entry("d", "w", Phase::Phase3Pair),
            LexiconEntry { source: "e".into(), translation: None, phase: Phase::Untranslated },
        ];
        let g = vec![
            gold("a", "x", Grade::A),
            gold("b", "y", Grade::B),
            gold("c", "z", Grade::C),
            gold("d", "w", Grade::A),
        ];
        let m = compute_metrics(&entries, &g, 6).unwrap();
        assert_eq!(m.precision(), 0.75);
        assert_eq!(m.recall(), 0.5);
        assert_eq!(m.per_phase[&Phase::Phase2][&Grade::C], 1);
        assert!(m.to_key_values().contains("precision=0.750000"));
    }

    #[test]
    fn missing_grade_lists_pairs() {
        let err = compute_metrics(&[entry("a", "x", Phase::Phase1)], &[], 1).unwrap_err();
        match err {
            EvalError::MissingGrades(p) => assert_eq!(p, [("a".to_string(), "x".to_string())]),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn gold_parsing() {
        let g = read_gold("a\tx\tA\nb\ty\tc\n".as_bytes()).unwrap();
        assert_eq!(g[1].grade, Grade::C);
        assert!(read_gold("a\tx\tD\n".as_bytes()).is_err());
        assert!(read_gold("a\tx\n".as_bytes()).is_err());
    }
}
