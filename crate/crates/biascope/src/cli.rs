//! Command definitions and dispatch for the `biascope` binary.
//!
//! Every command follows one discipline: read and digest each input
//! (built-in defaults included), run the corresponding library pipeline with
//! all computation up front, then write the outputs atomically and drop a
//! `<output>.manifest.json` sidecar recording the command, the full flag
//! snapshot, input content digests, output paths, and the seed where one
//! applies. Rerunning a command with identical inputs, flags, and
//! `--threads 1` reproduces every output byte for byte.
//!
//! Failures exit with status 2 and a single `error: ...` line on stderr.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use biascope::assoc::{
    lexicon_assoc, parse_lexicon, parse_specs, parse_word_sets, pmi_plane, temporal_weat,
    weat_test, WeatResult, WordSets,
};
use biascope::corpus::{
    clean_ocr, parse_corpus, parse_periods, parse_rules, split_periods, CompiledRules, Document,
};
use biascope::defaults;
use biascope::embed::{train_sgns, EmbeddingModel, TrainConfig};
use biascope::entities::{descriptor_counts, parse_entities, KeywordSets};
use biascope::error::{Error, Result};
use biascope::report::{atomic_write, csv_document, fmt_g9, RunManifest};
use biascope::stability::{
    parse_grid, parse_misspellings, run_stability_suite, StabilityReport,
};
use biascope::tokenize::{
    bpe_streams_from_docs, streams_from_docs, train_bpe_until, word_frequencies, TokenStream,
};

#[derive(Debug, Parser)]
#[command(
    name = "biascope",
    version,
    about = "Measure social bias in noisy historical text corpora"
)]
struct Cli {
    /// Worker threads. 1 (the default) makes every command bit-reproducible.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply OCR cleanup rules to a corpus.
    Clean(CleanArgs),
    /// Split a corpus into labelled time periods.
    Split(SplitArgs),
    /// Train word embeddings on a corpus.
    Train(TrainArgs),
    /// Compare embedding stability across tokenizers and hyperparameters.
    Stability(StabilityArgs),
    /// Run word-embedding association tests.
    Weat(WeatArgs),
    /// Chart descriptor usage on the gender/race PMI plane.
    Pmi(PmiArgs),
    /// Score descriptor usage per demographic group against a lexicon.
    Lexicon(LexiconArgs),
}

/// Parse the command line, size the worker pool, and dispatch. Any error
/// becomes a one-line `error: ...` message on stderr and exit status 2.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    let outcome = match &cli.command {
        Command::Clean(args) => cmd_clean(args, cli.threads),
        Command::Split(args) => cmd_split(args, cli.threads),
        Command::Train(args) => cmd_train(args, cli.threads),
        Command::Stability(args) => cmd_stability(args, cli.threads),
        Command::Weat(args) => cmd_weat(args, cli.threads),
        Command::Pmi(args) => cmd_pmi(args, cli.threads),
        Command::Lexicon(args) => cmd_lexicon(args, cli.threads),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Cap the global worker pool at `--threads`. Numeric results never depend
/// on pool size (only on `TrainConfig::threads`), so this is purely a
/// resource limit.
#[cfg(feature = "parallel")]
fn configure_threads(threads: usize) {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_threads: usize) {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TokenizerKind {
    /// Whitespace/punctuation word tokens.
    Word,
    /// Byte-pair-encoding subword tokens.
    Bpe,
}

impl TokenizerKind {
    fn as_str(self) -> &'static str {
        match self {
            TokenizerKind::Word => "word",
            TokenizerKind::Bpe => "bpe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    fn as_str(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

fn origin(path: &Path) -> String {
    path.display().to_string()
}

fn opt_origin(path: &Option<PathBuf>) -> Option<String> {
    path.as_ref().map(|p| origin(p))
}

/// Read a file, recording its content digest in the manifest.
fn read_input(path: &Path, manifest: &mut RunManifest) -> Result<String> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    manifest.record_input(&origin(path), raw.as_bytes());
    Ok(raw)
}

/// Record a built-in default used in place of a file input, under a
/// `builtin:` pseudo-path, so manifests capture exactly what ran.
fn record_builtin(manifest: &mut RunManifest, name: &str, contents: &str) {
    manifest.record_input(&format!("builtin:{name}"), contents.as_bytes());
}

fn write_json_report<T: Serialize>(path: &Path, rows: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(rows).expect("report rows serialize");
    atomic_write(path, format!("{json}\n").as_bytes())
}

// ---------------------------------------------------------------- clean

#[derive(Debug, Args)]
struct CleanArgs {
    /// Input corpus (JSONL, one document per line).
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Cleanup rules (JSONL); built-in rule set when omitted.
    #[arg(long, value_name = "FILE")]
    rules: Option<PathBuf>,
    /// Cleaned corpus (JSONL).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

fn cmd_clean(args: &CleanArgs, threads: usize) -> Result<()> {
    let config = json!({
        "in": origin(&args.input),
        "rules": opt_origin(&args.rules),
        "out": origin(&args.out),
        "threads": threads,
    });
    let mut manifest = RunManifest::new("clean", config);

    let raw = read_input(&args.input, &mut manifest)?;
    let docs = parse_corpus(&raw, &origin(&args.input))?;

    let compiled_storage;
    let rules: &CompiledRules = match &args.rules {
        Some(path) => {
            let raw = read_input(path, &mut manifest)?;
            let list = parse_rules(&raw, &origin(path))?;
            compiled_storage = CompiledRules::compile(&list)?;
            &compiled_storage
        }
        None => {
            record_builtin(&mut manifest, "ocr_rules", defaults::OCR_RULES_JSONL);
            defaults::ocr_rules()
        }
    };

    let cleaned: Vec<Document> = docs
        .into_iter()
        .map(|doc| Document { text: clean_ocr(&doc.text, rules), ..doc })
        .collect();

    biascope::corpus::save_corpus(&args.out, &cleaned)?;
    manifest.record_output(&args.out);
    manifest.write_for(&args.out)
}

// ---------------------------------------------------------------- split

#[derive(Debug, Args)]
struct SplitArgs {
    /// Input corpus (JSONL).
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Period definitions (JSON); built-in periods when omitted.
    #[arg(long, value_name = "FILE")]
    periods: Option<PathBuf>,
    /// Directory receiving one `<period>.jsonl` per period.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

fn cmd_split(args: &SplitArgs, threads: usize) -> Result<()> {
    let config = json!({
        "in": origin(&args.input),
        "periods": opt_origin(&args.periods),
        "out_dir": origin(&args.out_dir),
        "threads": threads,
    });
    let mut manifest = RunManifest::new("split", config);

    let raw = read_input(&args.input, &mut manifest)?;
    let docs = parse_corpus(&raw, &origin(&args.input))?;

    let periods = match &args.periods {
        Some(path) => {
            let raw = read_input(path, &mut manifest)?;
            parse_periods(&raw, &origin(path))?
        }
        None => {
            record_builtin(&mut manifest, "periods", defaults::PERIODS_JSON);
            defaults::periods().to_vec()
        }
    };
    // Period names become file names below.
    for p in &periods {
        if p.name.contains(['/', '\\']) || p.name == "." || p.name == ".." {
            return Err(Error::InvalidConfig(format!(
                "period name {:?} is not usable as a file name",
                p.name
            )));
        }
    }

    let by_period = split_periods(docs, &periods)?;
    for (name, docs) in &by_period {
        let path = args.out_dir.join(format!("{name}.jsonl"));
        biascope::corpus::save_corpus(&path, docs)?;
        manifest.record_output(&path);
    }
    manifest.write_for(args.out_dir.join("split"))
}

// ---------------------------------------------------------------- train

#[derive(Debug, Args)]
struct TrainArgs {
    /// Input corpus (JSONL).
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Vector table (text format).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = TokenizerKind::Word)]
    tokenizer: TokenizerKind,
    /// Embedding dimensionality.
    #[arg(long, default_value_t = TrainConfig::default().dim)]
    dim: usize,
    /// Maximum context window.
    #[arg(long, default_value_t = TrainConfig::default().window)]
    window: usize,
    /// Tokens below this count are dropped from the vocabulary.
    #[arg(long, default_value_t = TrainConfig::default().min_count)]
    min_count: u64,
    /// Negative samples per positive pair.
    #[arg(long, default_value_t = TrainConfig::default().negatives)]
    negatives: usize,
    /// Passes over the corpus.
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().seed)]
    seed: u64,
    /// Merge budget (target vocabulary size) for `--tokenizer bpe`.
    #[arg(long, default_value_t = 30_000)]
    bpe_vocab: usize,
    /// Where to save the learned BPE merge table (default `<out>.bpe`).
    #[arg(long, value_name = "FILE")]
    bpe_model_out: Option<PathBuf>,
}

fn cmd_train(args: &TrainArgs, threads: usize) -> Result<()> {
    let config = json!({
        "in": origin(&args.input),
        "out": origin(&args.out),
        "tokenizer": args.tokenizer.as_str(),
        "dim": args.dim,
        "window": args.window,
        "min_count": args.min_count,
        "negatives": args.negatives,
        "epochs": args.epochs,
        "seed": args.seed,
        "bpe_vocab": args.bpe_vocab,
        "bpe_model_out": opt_origin(&args.bpe_model_out),
        "threads": threads,
    });
    let mut manifest = RunManifest::new("train", config);
    manifest.seed = Some(args.seed);

    let raw = read_input(&args.input, &mut manifest)?;
    let docs = parse_corpus(&raw, &origin(&args.input))?;

    let train_config = TrainConfig {
        dim: args.dim,
        window: args.window,
        min_count: args.min_count,
        negatives: args.negatives,
        epochs: args.epochs,
        seed: args.seed,
        threads,
        ..TrainConfig::default()
    };

    match args.tokenizer {
        TokenizerKind::Word => {
            let streams = streams_from_docs(&docs, true);
            let model = train_sgns(&streams, &train_config)?;
            model.save(&args.out)?;
            manifest.record_output(&args.out);
        }
        TokenizerKind::Bpe => {
            // Pairs rarer than the embedding floor never merge, so rare
            // words keep decomposing into shared, trainable pieces.
            let freqs = word_frequencies(&docs);
            let bpe = train_bpe_until(&freqs, args.bpe_vocab, args.min_count);
            let streams = bpe_streams_from_docs(&docs, &bpe);
            let model = train_sgns(&streams, &train_config)?;

            let bpe_path = args
                .bpe_model_out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}.bpe", args.out.display())));
            bpe.save(&bpe_path)?;
            manifest.record_output(&bpe_path);
            model.save(&args.out)?;
            manifest.record_output(&args.out);
        }
    }
    manifest.write_for(&args.out)
}

// ---------------------------------------------------------------- stability

#[derive(Debug, Args)]
struct StabilityArgs {
    /// Input corpus (JSONL).
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Stability report.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Tokenizer/dim/min-count grid (JSON); built-in grid when omitted.
    #[arg(long, value_name = "FILE")]
    grid: Option<PathBuf>,
    /// Misspelling pairs (TSV `wrong<TAB>right`); built-in list when omitted.
    #[arg(long, value_name = "FILE")]
    pairs: Option<PathBuf>,
    /// Training runs per grid point, differing only in seed.
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Maximum context window for every run.
    #[arg(long, default_value_t = TrainConfig::default().window)]
    window: usize,
    /// Negative samples per positive pair.
    #[arg(long, default_value_t = TrainConfig::default().negatives)]
    negatives: usize,
    /// Passes over the corpus.
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    epochs: usize,
    /// Base seed; run `i` trains with `seed + i`.
    #[arg(long, default_value_t = TrainConfig::default().seed)]
    seed: u64,
    /// Merge budget for grid points with the `bpe` tokenizer.
    #[arg(long, default_value_t = 30_000)]
    bpe_vocab: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    format: ReportFormat,
}

fn cmd_stability(args: &StabilityArgs, threads: usize) -> Result<()> {
    let config = json!({
        "in": origin(&args.input),
        "out": origin(&args.out),
        "grid": opt_origin(&args.grid),
        "pairs": opt_origin(&args.pairs),
        "runs": args.runs,
        "window": args.window,
        "negatives": args.negatives,
        "epochs": args.epochs,
        "seed": args.seed,
        "bpe_vocab": args.bpe_vocab,
        "format": args.format.as_str(),
        "threads": threads,
    });
    let mut manifest = RunManifest::new("stability", config);
    manifest.seed = Some(args.seed);

    let raw = read_input(&args.input, &mut manifest)?;
    let docs = parse_corpus(&raw, &origin(&args.input))?;

    let grid = match &args.grid {
        Some(path) => {
            let raw = read_input(path, &mut manifest)?;
            parse_grid(&raw, &origin(path))?
        }
        None => {
            record_builtin(&mut manifest, "stability_grid", defaults::STABILITY_GRID_JSON);
            defaults::stability_grid().to_vec()
        }
    };
    let pairs = match &args.pairs {
        Some(path) => {
            let raw = read_input(path, &mut manifest)?;
            parse_misspellings(&raw, &origin(path))?
        }
        None => {
            record_builtin(&mut manifest, "misspellings", defaults::MISSPELLINGS_TSV);
            defaults::misspellings().to_vec()
        }
    };

    let mut streams_by_tokenizer: BTreeMap<String, Vec<TokenStream>> = BTreeMap::new();
    for point in &grid {
        match point.tokenizer.as_str() {
            "word" | "bpe" => {}
            other => {
                return Err(Error::InvalidConfig(format!(
                    "grid tokenizer {other:?} not supported (expected \"word\" or \"bpe\")"
                )))
            }
        }
    }
    if grid.iter().any(|p| p.tokenizer == "word") {
        streams_by_tokenizer.insert("word".into(), streams_from_docs(&docs, true));
    }
    let bpe_floors: Vec<u64> =
        grid.iter().filter(|p| p.tokenizer == "bpe").map(|p| p.min_count).collect();
    if let Some(&floor) = bpe_floors.iter().min() {
        let freqs = word_frequencies(&docs);
        let bpe = train_bpe_until(&freqs, args.bpe_vocab, floor);
        streams_by_tokenizer.insert("bpe".into(), bpe_streams_from_docs(&docs, &bpe));
    }

    let base = TrainConfig {
        window: args.window,
        negatives: args.negatives,
        epochs: args.epochs,
        seed: args.seed,
        threads,
        ..TrainConfig::default()
    };
    let reports = run_stability_suite(&streams_by_tokenizer, &base, &grid, args.runs, &pairs)?;

    match args.format {
        ReportFormat::Json => write_json_report(&args.out, &reports)?,
        ReportFormat::Csv => {
            let header = [
                "tokenizer",
                "dim",
                "min_count",
                "n_runs",
                "k_neighbors",
                "mean_jaccard_top_k",
                "misspelling_k",
                "misspelling_top_k_rate",
                "misspelling_coverage",
            ];
            let rows: Vec<Vec<String>> = reports.iter().map(stability_row).collect();
            atomic_write(&args.out, csv_document(&header, &rows).as_bytes())?;
        }
    }
    manifest.record_output(&args.out);
    manifest.write_for(&args.out)
}

fn stability_row(r: &StabilityReport) -> Vec<String> {
    vec![
        r.tokenizer.clone(),
        r.dim.to_string(),
        r.min_count.to_string(),
        r.n_runs.to_string(),
        r.k_neighbors.to_string(),
        fmt_g9(r.mean_jaccard_top_k),
        r.misspelling_k.to_string(),
        fmt_g9(r.misspelling_top_k_rate),
        fmt_g9(r.misspelling_coverage),
    ]
}

// ---------------------------------------------------------------- weat

#[derive(Debug, Args)]
struct WeatArgs {
    /// Vector table from `train` (single-model mode).
    #[arg(
        long,
        value_name = "FILE",
        required_unless_present = "vectors_dir",
        conflicts_with = "vectors_dir"
    )]
    vectors: Option<PathBuf>,
    /// Directory of per-period vector tables `<period>.txt` (temporal mode).
    #[arg(long, value_name = "DIR")]
    vectors_dir: Option<PathBuf>,
    /// Association-test report.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Word sets (JSON); built-in sets when omitted.
    #[arg(long, value_name = "FILE")]
    sets: Option<PathBuf>,
    /// Test definitions (JSON); built-in tests when omitted.
    #[arg(long, value_name = "FILE")]
    tests: Option<PathBuf>,
    /// Permutation count for p-values.
    #[arg(long, default_value_t = 10_000)]
    permutations: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    format: ReportFormat,
}

/// One line of the temporal report: a test result tagged with the period it
/// was computed on.
#[derive(Debug, Serialize)]
struct PeriodResult {
    period: String,
    #[serde(flatten)]
    result: WeatResult,
}

fn cmd_weat(args: &WeatArgs, threads: usize) -> Result<()> {
    let config = json!({
        "vectors": opt_origin(&args.vectors),
        "vectors_dir": opt_origin(&args.vectors_dir),
        "out": origin(&args.out),
        "sets": opt_origin(&args.sets),
        "tests": opt_origin(&args.tests),
        "permutations": args.permutations,
        "seed": args.seed,
        "format": args.format.as_str(),
        "threads": threads,
    });
    let mut manifest = RunManifest::new("weat", config);
    manifest.seed = Some(args.seed);

    let sets = match &args.sets {
        Some(path) => {
            let raw = read_input(path, &mut manifest)?;
            parse_word_sets(&raw, &origin(path))?
        }
        None => {
            record_builtin(&mut manifest, "weat_sets", defaults::WEAT_SETS_JSON);
            defaults::weat_sets().clone()
        }
    };
    let tests = match &args.tests {
        Some(path) => {
            let raw = read_input(path, &mut manifest)?;
            parse_specs(&raw, &origin(path))?
        }
        None => {
            record_builtin(&mut manifest, "weat_tests", defaults::WEAT_TESTS_JSON);
            defaults::weat_tests().to_vec()
        }
    };

    match (&args.vectors, &args.vectors_dir) {
        (Some(path), None) => {
            let raw = read_input(path, &mut manifest)?;
            let model = EmbeddingModel::parse(&raw, &origin(path))?;
            let mut results = Vec::with_capacity(tests.len());
            for spec in &tests {
                results.push(weat_test(&model, &sets, spec, args.permutations, args.seed)?);
            }
            match args.format {
                ReportFormat::Json => write_json_report(&args.out, &results)?,
                ReportFormat::Csv => {
                    let rows: Vec<Vec<String>> = results.iter().map(weat_row).collect();
                    atomic_write(&args.out, csv_document(&weat_header(false), &rows).as_bytes())?;
                }
            }
        }
        (None, Some(dir)) => {
            let models = load_period_models(dir, &mut manifest)?;
            let mut results = Vec::new();
            for spec in &tests {
                for (period, result) in
                    temporal_weat(&models, &sets, spec, args.permutations, args.seed)?
                {
                    results.push(PeriodResult { period, result });
                }
            }
            match args.format {
                ReportFormat::Json => write_json_report(&args.out, &results)?,
                ReportFormat::Csv => {
                    let rows: Vec<Vec<String>> = results
                        .iter()
                        .map(|pr| {
                            let mut row = vec![pr.period.clone()];
                            row.extend(weat_row(&pr.result));
                            row
                        })
                        .collect();
                    atomic_write(&args.out, csv_document(&weat_header(true), &rows).as_bytes())?;
                }
            }
        }
        // clap enforces exactly one of the two flags.
        _ => unreachable!("vector source flags validated by the parser"),
    }
    manifest.record_output(&args.out);
    manifest.write_for(&args.out)
}

fn weat_header(temporal: bool) -> Vec<&'static str> {
    let mut header = vec![
        "test",
        "statistic",
        "effect_size",
        "p_value",
        "n_permutations",
        "n_x",
        "n_y",
        "n_a",
        "n_b",
        "dropped_words",
    ];
    if temporal {
        header.insert(0, "period");
    }
    header
}

fn weat_row(r: &WeatResult) -> Vec<String> {
    vec![
        r.name.clone(),
        fmt_g9(r.statistic),
        r.effect_size.map(fmt_g9).unwrap_or_default(),
        fmt_g9(r.p_value),
        r.n_permutations.to_string(),
        r.n_x.to_string(),
        r.n_y.to_string(),
        r.n_a.to_string(),
        r.n_b.to_string(),
        r.dropped.join(" "),
    ]
}

/// Load every `<period>.txt` vector table in `dir`, sorted by file name so
/// period order (and therefore report order) is stable.
fn load_period_models(
    dir: &Path,
    manifest: &mut RunManifest,
) -> Result<Vec<(String, EmbeddingModel)>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("txt") {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no .txt vector tables found in {}",
            dir.display()
        )));
    }
    let mut models = Vec::with_capacity(paths.len());
    for path in &paths {
        let period = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let raw = read_input(path, manifest)?;
        models.push((period, EmbeddingModel::parse(&raw, &origin(path))?));
    }
    Ok(models)
}

// ---------------------------------------------------------------- pmi

#[derive(Debug, Args)]
struct PmiArgs {
    /// Entity records (JSONL).
    #[arg(long, value_name = "FILE")]
    entities: PathBuf,
    /// Classification keyword sets (JSON); built-in sets when omitted.
    #[arg(long, value_name = "FILE")]
    keywords: Option<PathBuf>,
    /// Minimum total descriptor count for a word to be charted.
    #[arg(long, default_value_t = 10)]
    min_word_count: u64,
    /// PMI-plane report.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    format: ReportFormat,
}

fn load_keywords(
    flag: &Option<PathBuf>,
    manifest: &mut RunManifest,
) -> Result<KeywordSets> {
    let sets_storage;
    let sets: &WordSets = match flag {
        Some(path) => {
            let raw = read_input(path, manifest)?;
            sets_storage = parse_word_sets(&raw, &origin(path))?;
            &sets_storage
        }
        None => {
            record_builtin(manifest, "classify_keywords", defaults::CLASSIFY_KEYWORDS_JSON);
            defaults::classify_keywords()
        }
    };
    KeywordSets::from_word_sets(sets)
}

fn cmd_pmi(args: &PmiArgs, threads: usize) -> Result<()> {
    let config = json!({
        "entities": origin(&args.entities),
        "keywords": opt_origin(&args.keywords),
        "min_word_count": args.min_word_count,
        "out": origin(&args.out),
        "format": args.format.as_str(),
        "threads": threads,
    });
    let mut manifest = RunManifest::new("pmi", config);

    let raw = read_input(&args.entities, &mut manifest)?;
    let entities = parse_entities(&raw, &origin(&args.entities))?;
    let keywords = load_keywords(&args.keywords, &mut manifest)?;

    let table = descriptor_counts(&entities, &keywords);
    let (points, _skipped) = pmi_plane(&table, args.min_word_count)?;

    match args.format {
        ReportFormat::Json => write_json_report(&args.out, &points)?,
        ReportFormat::Csv => {
            let header = [
                "word",
                "gender_axis",
                "race_axis",
                "count_female",
                "count_male",
                "count_non_white",
                "count_white",
            ];
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|p| {
                    vec![
                        p.word.clone(),
                        fmt_g9(p.gender_axis),
                        fmt_g9(p.race_axis),
                        p.count_female.to_string(),
                        p.count_male.to_string(),
                        p.count_non_white.to_string(),
                        p.count_white.to_string(),
                    ]
                })
                .collect();
            atomic_write(&args.out, csv_document(&header, &rows).as_bytes())?;
        }
    }
    manifest.record_output(&args.out);
    manifest.write_for(&args.out)
}

// ---------------------------------------------------------------- lexicon

#[derive(Debug, Args)]
struct LexiconArgs {
    /// Entity records (JSONL).
    #[arg(long, value_name = "FILE")]
    entities: PathBuf,
    /// Classification keyword sets (JSON); built-in sets when omitted.
    #[arg(long, value_name = "FILE")]
    keywords: Option<PathBuf>,
    /// Weighted lexicon (TSV `word<TAB>value`).
    #[arg(long, value_name = "FILE")]
    lexicon: PathBuf,
    /// Per-group lexicon report.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    format: ReportFormat,
}

/// One line of the lexicon report: the group's descriptor volume, how much
/// of it the lexicon covers, and the coverage-weighted mean value (absent
/// when the lexicon covers nothing in the group).
#[derive(Debug, Serialize)]
struct GroupScore {
    group: String,
    n_tokens: u64,
    n_covered: u64,
    mean_value: Option<f64>,
}

fn cmd_lexicon(args: &LexiconArgs, threads: usize) -> Result<()> {
    let config = json!({
        "entities": origin(&args.entities),
        "keywords": opt_origin(&args.keywords),
        "lexicon": origin(&args.lexicon),
        "out": origin(&args.out),
        "format": args.format.as_str(),
        "threads": threads,
    });
    let mut manifest = RunManifest::new("lexicon", config);

    let raw = read_input(&args.entities, &mut manifest)?;
    let entities = parse_entities(&raw, &origin(&args.entities))?;
    let keywords = load_keywords(&args.keywords, &mut manifest)?;

    let lexicon_name = args
        .lexicon
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "lexicon".into());
    let raw = read_input(&args.lexicon, &mut manifest)?;
    let lexicon = parse_lexicon(&raw, &origin(&args.lexicon), &lexicon_name)?;

    let table = descriptor_counts(&entities, &keywords);
    let mut scores = Vec::new();
    for group in table.groups().map(str::to_owned).collect::<Vec<_>>() {
        let counts = table.group_counts(&group).expect("listed group exists");
        let n_covered =
            counts.iter().filter(|(w, _)| lexicon.weight(w).is_some()).map(|(_, &c)| c).sum();
        let mean_value = match lexicon_assoc(&lexicon, counts) {
            Ok(v) => Some(v),
            Err(Error::ZeroCoverage { .. }) => None,
            Err(e) => return Err(e),
        };
        let n_tokens = table.group_total(&group);
        scores.push(GroupScore { group, n_tokens, n_covered, mean_value });
    }

    match args.format {
        ReportFormat::Json => write_json_report(&args.out, &scores)?,
        ReportFormat::Csv => {
            let header = ["group", "n_tokens", "n_covered", "mean_value"];
            let rows: Vec<Vec<String>> = scores
                .iter()
                .map(|s| {
                    vec![
                        s.group.clone(),
                        s.n_tokens.to_string(),
                        s.n_covered.to_string(),
                        s.mean_value.map(fmt_g9).unwrap_or_default(),
                    ]
                })
                .collect();
            atomic_write(&args.out, csv_document(&header, &rows).as_bytes())?;
        }
    }
    manifest.record_output(&args.out);
    manifest.write_for(&args.out)
}
