use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lexiforge::config::{BackendKind, RunConfig};
use lexiforge::corpus::parse_tagged_corpus;
use lexiforge::dictionary::{load_dictionary, BilingualDictionary};
use lexiforge::eval::{compute_metrics, read_gold};
use lexiforge::extraction::{extract_ulcs, filter_ulcs, read_ulcs, write_ulcs, SourceUlc};
use lexiforge::oracle::{
    compact, read_records, FixtureBackend, HttpBackend, LocalIndex, OracleQuery, OracleResponse,
    ResponseCache, SearchBackend, SearchOracle,
};
use lexiforge::phase2::{build_lexical_world, LanguageKit, WorldContext};
use lexiforge::pipeline::{read_lexicon, run_pipeline, Phase};
use lexiforge::tagger::LexiconTagger;
use lexiforge::text::StopWords;

const EXIT_USAGE: u8 = 2;
const EXIT_UNRESOLVED: u8 = 3;

#[derive(Parser)]
#[command(name = "lexiforge", version, about = "Acquire a bilingual lexicon of two-word units using a search engine as corpus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract candidate units from a tagged corpus and filter them by web counts.
    Extract(ExtractArgs),
    /// Classify units and run the translation cascade.
    Translate(TranslateArgs),
    /// Score a lexicon against graded gold pairs.
    Evaluate(EvaluateArgs),
    /// Print the lexical world of a phrase.
    World(WorldArgs),
    /// Inspect or compact a response cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Args, Clone, Default)]
struct OracleArgs {
    /// Key = value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Answer from the cache only, never contacting a backend.
    #[arg(long)]
    offline: bool,
    #[arg(long)]
    cache: Option<PathBuf>,
    /// http, local or fixture.
    #[arg(long)]
    backend: Option<BackendKind>,
    #[arg(long)]
    endpoint: Option<String>,
    /// Document file (`id<TAB>lang<TAB>text`) for the local backend.
    #[arg(long)]
    index: Option<PathBuf>,
    /// Response file for the fixture backend.
    #[arg(long)]
    fixture: Option<PathBuf>,
    #[arg(long)]
    source_lang: Option<String>,
    #[arg(long)]
    target_lang: Option<String>,
    /// Extra `key=value` settings, as in the configuration file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    settings: Vec<String>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Output file for the units; stdout if absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Keep only the N units with the highest literal hit counts.
    #[arg(long)]
    max_ulcs: Option<usize>,
    #[arg(long)]
    min_corpus_freq: Option<usize>,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(Args)]
struct TranslateArgs {
    /// Unit file written by `extract`.
    #[arg(long, conflicts_with = "corpus")]
    ulcs: Option<PathBuf>,
    /// Tagged corpus; units are extracted and web-filtered first.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Only process units entering at this phase, and run only that phase.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    phase: Option<u8>,
    /// Use "an" instead of "a" before vowels in validation queries.
    #[arg(long)]
    use_an: bool,
    #[arg(long)]
    max_ulcs: Option<usize>,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Lexicon written by `translate`.
    #[arg(long)]
    lexicon: PathBuf,
    /// Gold file: `source<TAB>translation<TAB>grade`.
    #[arg(long)]
    gold: PathBuf,
    /// Size of the source sample; defaults to the number of lexicon lines.
    #[arg(long)]
    total_sources: Option<usize>,
    /// Print only machine-readable key=value lines.
    #[arg(long)]
    machine: bool,
}

#[derive(Args)]
struct WorldArgs {
    phrase: String,
    /// Language of the phrase; defaults to the source language.
    #[arg(long)]
    lang: Option<String>,
    /// Words left out of the world (comma-separated).
    #[arg(long, value_delimiter = ',')]
    exclude: Vec<String>,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(Subcommand)]
enum CacheAction {
    /// Count records by query kind.
    Inspect { path: PathBuf },
    /// Rewrite with one sorted record per key.
    Compact { path: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Extract(args) => cmd_extract(args),
        Command::Translate(args) => cmd_translate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::World(args) => cmd_world(args),
        Command::Cache { action } => cmd_cache(action),
    }
}

fn load_config(args: &OracleArgs) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        config.apply(&text)?;
    }
    for s in &args.settings {
        let (k, v) = s
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got {s:?}"))?;
        config.set(k.trim(), v)?;
    }
    let o = &mut config.oracle;
    if args.offline {
        o.offline = true;
    }
    if let Some(p) = &args.cache {
        o.cache = Some(p.clone());
    }
    if let Some(b) = args.backend {
        o.backend = b;
    }
    if let Some(e) = &args.endpoint {
        o.endpoint = Some(e.clone());
    }
    if let Some(p) = &args.index {
        o.index = Some(p.clone());
        if args.backend.is_none() {
            o.backend = BackendKind::Local;
        }
    }
    if let Some(p) = &args.fixture {
        o.fixture = Some(p.clone());
        if args.backend.is_none() {
            o.backend = BackendKind::Fixture;
        }
    }
    if let Some(l) = &args.source_lang {
        config.source_lang = l.clone();
    }
    if let Some(l) = &args.target_lang {
        config.target_lang = l.clone();
    }
    config.apply_env();
    Ok(config)
}

fn build_oracle(config: &RunConfig) -> Result<SearchOracle> {
    let o = &config.oracle;
    let cache = match &o.cache {
        Some(p) if o.offline => ResponseCache::open_read_only(p)
            .with_context(|| format!("opening cache {}", p.display()))?,
        Some(p) => ResponseCache::open(p).with_context(|| format!("opening cache {}", p.display()))?,
        None => ResponseCache::in_memory(),
    };
    if o.offline {
        return Ok(SearchOracle::offline(cache));
    }
    let backend: Box<dyn SearchBackend> = match o.backend {
        BackendKind::Http => {
            let http = o.http_config().context("no oracle endpoint configured")?;
            Box::new(HttpBackend::new(http)?)
        }
        BackendKind::Local => {
            let path = o.index.as_ref().context("no local index configured")?;
            let file = File::open(path).with_context(|| format!("opening index {}", path.display()))?;
            Box::new(LocalIndex::parse(BufReader::new(file))?)
        }
        BackendKind::Fixture => {
            let path = o.fixture.as_ref().context("no fixture configured")?;
            Box::new(FixtureBackend::load(path)?)
        }
    };
    Ok(SearchOracle::new(backend, cache).with_parallelism(o.parallelism))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn load_units(corpus: &Path, config: &RunConfig, oracle: &SearchOracle) -> Result<(Vec<SourceUlc>, usize)> {
    let corpus = parse_tagged_corpus(open(corpus)?)
        .with_context(|| format!("parsing corpus {}", corpus.display()))?;
    let candidates = extract_ulcs(&corpus, config.extraction.min_corpus_freq);
    log::info!("{} candidate units above corpus frequency", candidates.len());
    let outcome = filter_ulcs(candidates, oracle, &config.extraction);
    for u in &outcome.unresolved {
        eprintln!("unresolved: {}", u.surface);
    }
    Ok((outcome.accepted, outcome.unresolved.len()))
}

fn cmd_extract(args: ExtractArgs) -> Result<ExitCode> {
    let mut config = load_config(&args.oracle)?;
    if let Some(p) = args.corpus {
        config.corpus = Some(p);
    }
    if args.max_ulcs.is_some() {
        config.extraction.max_ulcs = args.max_ulcs;
    }
    if let Some(n) = args.min_corpus_freq {
        config.extraction.min_corpus_freq = n;
    }
    let corpus = config.corpus.clone().context("no corpus given (--corpus)")?;
    if !corpus.is_file() {
        bail!("corpus {} not found", corpus.display());
    }
    config.validate()?;
    let oracle = build_oracle(&config)?;
    let (units, unresolved) = load_units(&corpus, &config, &oracle)?;

    match &args.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            write_ulcs(&mut w, &units)?;
            w.flush()?;
        }
        None => write_ulcs(io::stdout().lock(), &units)?,
    }
    eprintln!("{} units accepted, {unresolved} unresolved", units.len());
    Ok(exit_for(unresolved > 0))
}

fn exit_for(unresolved: bool) -> ExitCode {
    if unresolved {
        ExitCode::from(EXIT_UNRESOLVED)
    } else {
        ExitCode::SUCCESS
    }
}

struct Language {
    code: String,
    tagger: LexiconTagger,
    stopwords: StopWords,
}

impl Language {
    fn load(code: &str, lexicon: Option<&Path>, stopwords: Option<&Path>) -> Result<Self> {
        let tagger = match lexicon {
            Some(p) => LexiconTagger::parse(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
            None => LexiconTagger::builtin(code),
        };
        let stopwords = match stopwords {
            Some(p) => StopWords::parse(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
            None => StopWords::builtin(code),
        };
        if tagger.is_empty() {
            log::warn!("no tagger lexicon for {code:?}; lexical worlds will be empty");
        }
        Ok(Language {
            code: code.to_string(),
            tagger,
            stopwords,
        })
    }

    fn kit(&self) -> LanguageKit<'_> {
        LanguageKit {
            lang: &self.code,
            tagger: &self.tagger,
            stopwords: &self.stopwords,
        }
    }
}

fn languages(config: &RunConfig) -> Result<(Language, Language)> {
    Ok((
        Language::load(
            &config.source_lang,
            config.source_lexicon.as_deref(),
            config.source_stopwords.as_deref(),
        )?,
        Language::load(
            &config.target_lang,
            config.target_lexicon.as_deref(),
            config.target_stopwords.as_deref(),
        )?,
    ))
}

fn cmd_translate(args: TranslateArgs) -> Result<ExitCode> {
    let mut config = load_config(&args.oracle)?;
    if let Some(p) = args.corpus.clone() {
        config.corpus = Some(p);
    }
    if let Some(p) = args.dictionary {
        config.dictionary = Some(p);
    }
    if let Some(p) = args.output {
        config.output = p;
    }
    if args.max_ulcs.is_some() {
        config.extraction.max_ulcs = args.max_ulcs;
    }
    if args.use_an {
        config.pipeline.phase1.use_an = true;
    }
    config.pipeline.only_phase = args.phase;
    config.validate()?;

    let dict_path = config.dictionary.clone().context("no dictionary given (--dictionary)")?;
    let dict: BilingualDictionary = load_dictionary(open(&dict_path)?)
        .with_context(|| format!("reading dictionary {}", dict_path.display()))?;
    let oracle = build_oracle(&config)?;

    let (units, mut unresolved) = match (&args.ulcs, &config.corpus) {
        (Some(p), _) => (read_ulcs(open(p)?).with_context(|| format!("reading {}", p.display()))?, 0),
        (None, Some(corpus)) => load_units(corpus, &config, &oracle)?,
        (None, None) => bail!("give a unit file (--ulcs) or a corpus (--corpus)"),
    };

    let (src, tgt) = languages(&config)?;
    let ctx = WorldContext {
        source: src.kit(),
        target: tgt.kit(),
        dict: &dict,
    };
    let report = run_pipeline(&units, &oracle, &ctx, &config.pipeline);
    report
        .write_report(&config.output)
        .with_context(|| format!("writing report to {}", config.output.display()))?;
    if args.corpus.is_some() {
        let mut w = BufWriter::new(File::create(config.output.join("ulcs.tsv"))?);
        write_ulcs(&mut w, &units)?;
        w.flush()?;
    }

    unresolved += report.count(Phase::UnresolvedOracle);
    eprintln!(
        "{} units, {} translated, {} unresolved; report in {}",
        report.records.len(),
        report.translated(),
        unresolved,
        config.output.display()
    );
    Ok(exit_for(unresolved > 0))
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let entries = read_lexicon(open(&args.lexicon)?)
        .with_context(|| format!("reading lexicon {}", args.lexicon.display()))?;
    let gold = read_gold(open(&args.gold)?).with_context(|| format!("reading gold {}", args.gold.display()))?;
    let total = args.total_sources.unwrap_or(entries.len());
    let metrics = compute_metrics(&entries, &gold, total)?;
    if !args.machine {
        print!("{}", metrics.to_table());
        println!();
    }
    print!("{}", metrics.to_key_values());
    Ok(ExitCode::SUCCESS)
}

fn cmd_world(args: WorldArgs) -> Result<ExitCode> {
    let config = load_config(&args.oracle)?;
    config.validate()?;
    let oracle = build_oracle(&config)?;
    let lang = args.lang.unwrap_or_else(|| config.source_lang.clone());
    let (lexicon, stop) = if lang == config.target_lang {
        (config.target_lexicon.as_deref(), config.target_stopwords.as_deref())
    } else {
        (config.source_lexicon.as_deref(), config.source_stopwords.as_deref())
    };
    let language = Language::load(&lang, lexicon, stop)?;
    let exclude: HashSet<String> = args.exclude.iter().map(|w| w.to_lowercase()).collect();
    let world = match build_lexical_world(
        &args.phrase,
        &language.kit(),
        &oracle,
        &exclude,
        config.pipeline.phase2.snippet_limit,
        config.pipeline.phase2.world_size,
    ) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_UNRESOLVED));
        }
    };
    println!("{}", world.dump_line());
    Ok(ExitCode::SUCCESS)
}

fn cmd_cache(action: CacheAction) -> Result<ExitCode> {
    match action {
        CacheAction::Inspect { path } => {
            let (entries, stats) =
                read_records(&path).with_context(|| format!("reading cache {}", path.display()))?;
            let mut kinds: BTreeMap<String, (usize, usize)> = BTreeMap::new();
            for (key, response) in &entries {
                let kind = OracleQuery::from_cache_key(key)
                    .map_or("?".to_string(), |q| format!("{:?}", q.kind));
                let slot = kinds.entry(kind).or_default();
                slot.0 += 1;
                if let OracleResponse::Snippets(s) = response {
                    slot.1 += s.len();
                }
            }
            println!("records\t{}", stats.records);
            println!("distinct\t{}", entries.len());
            println!("skipped\t{}", stats.skipped);
            for (kind, (n, snippets)) in kinds {
                println!("{kind}\t{n}\t{snippets} snippets");
            }
        }
        CacheAction::Compact { path } => {
            let kept = compact(&path).with_context(|| format!("compacting {}", path.display()))?;
            println!("{kept} records kept");
        }
    }
    Ok(ExitCode::SUCCESS)
}
