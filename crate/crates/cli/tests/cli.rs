use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lexiforge::oracle::{OracleQuery, OracleResponse, PhraseSet};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lexiforge"))
}

fn e2e() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e")
}

fn language_settings(cmd: &mut Command) -> &mut Command {
    let f = e2e();
    for (key, file) in [
        ("tagger.source_lexicon", "lexicon.fr.tsv"),
        ("tagger.target_lexicon", "lexicon.en.tsv"),
        ("stopwords.source", "stopwords.fr.txt"),
        ("stopwords.target", "stopwords.en.txt"),
    ] {
        cmd.arg("--set").arg(format!("{key}={}", f.join(file).display()));
    }
    cmd
}

fn translate(out: &Path, cache: &Path, extra: &[&str]) -> Output {
    let f = e2e();
    let mut cmd = bin();
    cmd.arg("translate")
        .arg("--ulcs")
        .arg(f.join("ulcs.tsv"))
        .arg("--dictionary")
        .arg(f.join("dict.tsv"))
        .arg("-o")
        .arg(out)
        .arg("--offline")
        .arg("--cache")
        .arg(cache)
        .args(extra);
    language_settings(&mut cmd).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_corpus_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["extract", "--corpus"])
        .arg(dir.path().join("nope.tsv"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("nope.tsv"));
}

#[test]
fn bad_setting_is_a_usage_error() {
    let o = bin().args(["world", "x", "--set", "phase2.world_size=lots"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn offline_without_cache_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = translate(&dir.path().join("out"), &dir.path().join("absent.jsonl"), &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn offline_cache_miss_leaves_units_unresolved() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("empty.jsonl");
    fs::write(&cache, "").unwrap();
    let out = dir.path().join("out");
    let o = translate(&out, &cache, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let lexicon = fs::read_to_string(out.join("lexicon.tsv")).unwrap();
    assert!(lexicon.contains("messe de minuit\t-\tUNRESOLVED_ORACLE"));
    // dictionary entries need no oracle
    assert!(lexicon.contains("pomme de terre\tpotato\tDICTIONARY"));
    // the read-only cache is never written
    assert_eq!(fs::read_to_string(&cache).unwrap(), "");
}

#[test]
fn phase_flag_restricts_units_and_phases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = translate(&out, &e2e().join("cache.jsonl"), &["--phase", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lexicon = fs::read_to_string(out.join("lexicon.tsv")).unwrap();
    let rows: Vec<Vec<&str>> = lexicon.lines().map(|l| l.split('\t').collect()).collect();
    // the polysemous units of the fixture, none of them sent on to phase 3
    let sources: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(
        sources,
        [
            "caisse de retraite",
            "carte de crédit",
            "fête nationale",
            "lumière chaude",
            "maison de retraite",
            "salle de bain",
            "salle de concert",
            "voyage organisé",
        ]
    );
    for r in &rows {
        assert!(r[2] == "PHASE2" || r[2] == "UNTRANSLATED", "{r:?}");
    }
    let maison = rows.iter().find(|r| r[0] == "maison de retraite").unwrap();
    assert_eq!(maison[2], "UNTRANSLATED");

    let o = translate(&out, &e2e().join("cache.jsonl"), &["--phase", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = translate(&out, &e2e().join("cache.jsonl"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["lexicon.tsv", "summary.txt", "verdicts.tsv", "mined.tsv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("units\t20"), "{summary}");
    assert!(summary.contains("translated\t17"), "{summary}");
    let verdicts = fs::read_to_string(out.join("verdicts.tsv")).unwrap();
    assert!(verdicts.contains("messe de minuit\tmidnight mass\tN2_N1\tmass\t336000\t764000000\t76400\ttrue"));
    assert!(verdicts.contains("messe de minuit\tmass of midnight\tN1_OF_N2\tmass\t65\t764000000\t76400\tfalse"));
}

fn cache_line(q: &OracleQuery, n: u64) -> String {
    format!("{}\t{}\n", q.cache_key(), OracleResponse::Count(n).to_payload())
}

fn web_counts(surface: &str, literal: u64, article: u64) -> String {
    let articles = lexiforge::extraction::article_phrases(surface);
    cache_line(&OracleQuery::phrase_count(surface), literal)
        + &cache_line(&OracleQuery::count_of(PhraseSet::any_of(articles)), article)
}

#[test]
fn extract_matches_hand_checked_units() {
    let dir = tempfile::tempdir().unwrap();
    let mut corpus = String::from("#DOC d1\n");
    let sentence = |words: &[(&str, &str, &str)]| {
        let mut s: String = words.iter().map(|(w, t, l)| format!("{w}\t{t}\t{l}\n")).collect();
        s.push_str(".\tSENT\t.\n");
        s
    };
    for _ in 0..12 {
        corpus += &sentence(&[("une", "DET:ART", "un"), ("ambiance", "NOM", "ambiance"), ("musicale", "ADJ", "musical")]);
        corpus += &sentence(&[("appareil", "NOM", "appareil"), ("d'", "PRP", "de"), ("imagerie", "NOM", "imagerie")]);
    }
    for _ in 0..10 {
        corpus += &sentence(&[("caisses", "NOM", "caisse"), ("de", "PRP", "de"), ("retraite", "NOM", "retraite")]);
        corpus += &sentence(&[("vin", "NOM", "vin"), ("rouge", "ADJ", "rouge")]);
    }
    for _ in 0..9 {
        corpus += &sentence(&[("taux", "NOM", "taux"), ("de", "PRP", "de"), ("change", "NOM", "change")]);
    }
    let corpus_path = dir.path().join("corpus.tsv");
    fs::write(&corpus_path, corpus).unwrap();

    let fixture = web_counts("ambiance musicale", 120_000, 9_000)
        + &web_counts("appareil d'imagerie", 15_000, 1_000)
        + &web_counts("caisses de retraite", 157_000, 20_000)
        // too rare with an article
        + &web_counts("vin rouge", 3_100_000, 999);
    let fixture_path = dir.path().join("fixture.jsonl");
    fs::write(&fixture_path, fixture).unwrap();

    let out = dir.path().join("ulcs.tsv");
    let o = bin()
        .arg("extract")
        .arg("--corpus")
        .arg(&corpus_path)
        .arg("--fixture")
        .arg(&fixture_path)
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut got: Vec<String> = fs::read_to_string(&out).unwrap().lines().map(String::from).collect();
    got.sort();
    assert_eq!(
        got,
        [
            "ambiance\tmusical\tNOUN_ADJ\tambiance musicale\t12\t120000\t9000",
            "appareil\timagerie\tNOUN_D_NOUN\tappareil d'imagerie\t12\t15000\t1000",
            "caisse\tretraite\tNOUN_DE_NOUN\tcaisses de retraite\t10\t157000\t20000",
        ]
    );

    // the cap keeps the most frequent on the web
    let o = bin()
        .arg("extract")
        .arg("--corpus")
        .arg(&corpus_path)
        .arg("--fixture")
        .arg(&fixture_path)
        .args(["--max-ulcs", "1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1);
    assert!(stdout.starts_with("caisse\tretraite"));
}

#[test]
fn evaluate_reports_metrics_and_rejects_ungraded_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = dir.path().join("lexicon.tsv");
    fs::write(
        &lexicon,
        "a\tx\tPHASE1\t-\nb\ty\tPHASE2\t-\nc\tz\tPHASE3_PAIR\t-\nd\t-\tUNTRANSLATED\t-\n",
    )
    .unwrap();
    let gold = dir.path().join("gold.tsv");
    fs::write(&gold, "a\tx\tA\nb\ty\tB\nc\tz\tC\n").unwrap();
    let o = bin()
        .arg("evaluate")
        .arg("--lexicon")
        .arg(&lexicon)
        .arg("--gold")
        .arg(&gold)
        .arg("--machine")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("precision=0.666667"), "{stdout}");
    assert!(stdout.contains("recall=0.500000"), "{stdout}");

    let empty = dir.path().join("empty.tsv");
    fs::write(&empty, "").unwrap();
    let o = bin()
        .arg("evaluate")
        .arg("--lexicon")
        .arg(&lexicon)
        .arg("--gold")
        .arg(&empty)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("a -> x"));
}

#[test]
fn world_prints_a_dump_line() {
    let mut cmd = bin();
    cmd.args(["world", "nursing home", "--lang", "en", "--exclude", "nursing,home", "--offline", "--cache"])
        .arg(e2e().join("cache.jsonl"));
    let o = language_settings(&mut cmd).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = String::from_utf8(o.stdout).unwrap();
    let fields: Vec<&str> = line.trim_end().split('\t').collect();
    assert_eq!(fields[..3], ["nursing home", "en", "30"]);
    // snippet i names nouns i and i+1 (mod 4), over 30 snippets
    assert_eq!(fields[3], "resident:16 care:15 staff:15 family:14");
    assert_eq!(fields[4], "elderly:15 medical:15");

    let mut cmd = bin();
    cmd.args(["world", "not cached", "--offline", "--cache"]).arg(e2e().join("cache.jsonl"));
    assert_eq!(cmd.output().unwrap().status.code(), Some(3));
}

#[test]
fn cache_inspect_counts_kinds() {
    let o = bin().args(["cache", "inspect"]).arg(e2e().join("cache.jsonl")).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("skipped\t0"), "{s}");
    assert!(s.contains("MixedSnippets\t"), "{s}");
}
