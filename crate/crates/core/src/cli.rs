//! The `bibclass` command line.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data errors. Only a
//! summary goes to stdout; machine-readable output goes to the files named by
//! `--out` and `--grid-out`.
//!
//! `BIBCLASS_CONFIG` may name a TOML file whose keys are flag names without
//! the leading dashes (`st = 0.3`, `records = "r.jsonl"`). Flags given on the
//! command line take precedence.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use log::warn;

use crate::bayes::{self, CategoryModel, TextClassifierConfig};
use crate::citegraph::{self, CitationClassifierConfig, CitationGraph};
use crate::corpus::{self, BibRecord, DatabaseId};
use crate::error::{Error, Result};
use crate::evalhub::{self, Assignment, Mode, Pipeline, SweepGrid};
use crate::textpipe::{TokenizerConfig, DEFAULT_MIN_TOKEN_LENGTH};

pub const CONFIG_ENV: &str = "BIBCLASS_CONFIG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "bibclass",
    version,
    about = "Assign bibliographic records to subject databases",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a text model from gold-labeled records
    BuildModel(BuildArgs),
    /// Assign databases to records and write one line per record
    Classify(ClassifyArgs),
    /// Score assignments for one database against gold labels
    Evaluate(EvaluateArgs),
    /// Evaluate a grid of thresholds and write a CSV
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct TokenizerArgs {
    /// Stop word list, one per line [default: bundled list]
    #[arg(long, value_name = "PATH")]
    stopwords: Option<PathBuf>,
    /// Stop phrase list, one per line [default: bundled list]
    #[arg(long, value_name = "PATH")]
    stopphrases: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// Training records (JSON lines)
    #[arg(long, value_name = "PATH", default_value = "records.jsonl")]
    records: PathBuf,
    /// Model file to write
    #[arg(long, value_name = "PATH", default_value = "bibclass.model")]
    model: PathBuf,
    /// Comma separated database names
    #[arg(long, default_value = "astronomy,physics,general")]
    databases: String,
    /// Additive smoothing constant
    #[arg(long, default_value_t = bayes::DEFAULT_ALPHA)]
    alpha: f64,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
    /// Worker threads, 0 for one per processor
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// Records to classify (JSON lines)
    #[arg(long, value_name = "PATH", default_value = "records.jsonl")]
    records: PathBuf,
    /// Citation edges, citing<TAB>cited [default: none]
    #[arg(long, value_name = "PATH")]
    citations: Option<PathBuf>,
    /// Database memberships of citing records, id<TAB>db,db [default: none]
    #[arg(long, value_name = "PATH")]
    memberships: Option<PathBuf>,
    /// Model written by build-model
    #[arg(long, value_name = "PATH", default_value = "bibclass.model")]
    model: PathBuf,
    /// Trigger terms, database<TAB>term [default: none]
    #[arg(long, value_name = "PATH")]
    triggers: Option<PathBuf>,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
    /// Which classifiers to run: text, citation or combined
    #[arg(long, default_value = "combined")]
    mode: String,
    /// Database set used when no model is loaded
    #[arg(long, default_value = "astronomy,physics,general")]
    databases: String,
    /// Score added when a trigger term is present
    #[arg(long, default_value_t = bayes::DEFAULT_TRIGGER_BOOST)]
    boost: f64,
    /// Worker threads, 0 for one per processor
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    /// Minimum words for text classification (N_t)
    #[arg(long, default_value_t = bayes::DEFAULT_MIN_WORDS)]
    nt: usize,
    /// Minimum text score (S_t)
    #[arg(long, default_value_t = bayes::DEFAULT_SCORE_THRESHOLD)]
    st: f64,
    /// Minimum citing papers (N_c)
    #[arg(long, default_value_t = citegraph::DEFAULT_MIN_CITATIONS)]
    nc: usize,
    /// Minimum citation ratio (R_c)
    #[arg(long, default_value_t = citegraph::DEFAULT_RATIO_THRESHOLD)]
    rc: f64,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Assignment file to write
    #[arg(long, value_name = "PATH", default_value = "assignments.tsv")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Database to evaluate
    #[arg(long, default_value = "astronomy")]
    db: String,
    /// Also write the assignments here [default: none]
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write the report as a one-row grid CSV [default: none]
    #[arg(long, value_name = "PATH")]
    grid_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Comma separated N_t values
    #[arg(long, default_value = "5")]
    nt: String,
    /// Comma separated S_t values
    #[arg(long, default_value = "0.25")]
    st: String,
    /// Comma separated N_c values
    #[arg(long, default_value = "4")]
    nc: String,
    /// Comma separated R_c values
    #[arg(long, default_value = "0.5")]
    rc: String,
    /// Database to evaluate
    #[arg(long, default_value = "astronomy")]
    db: String,
    /// Grid CSV to write
    #[arg(long, value_name = "PATH", default_value = "grid.csv")]
    grid_out: PathBuf,
}

/// Runs the CLI and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match std::env::var_os(CONFIG_ENV) {
        Some(path) if !path.is_empty() => match apply_config_file(Path::new(&path), argv) {
            Ok(argv) => argv,
            Err(e) => return report(e),
        },
        _ => argv,
    };

    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };

    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => report(e),
    }
}

fn report(e: Error) -> i32 {
    eprintln!("error: {e}");
    if e.is_usage() {
        eprintln!("\nFor more information, try '--help'.");
        EXIT_USAGE
    } else {
        EXIT_DATA
    }
}

/// Inserts `--key value` pairs from the config file directly after the
/// subcommand name, so later explicit flags override them. Keys the
/// subcommand does not accept are ignored.
fn apply_config_file(path: &Path, argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        path: path.to_owned(),
        line: e
            .span()
            .map(|s| text[..s.start].matches('\n').count() + 1)
            .unwrap_or(0),
        reason: e.message().to_owned(),
    })?;

    let command = Cli::command();
    let Some((pos, sub)) = argv.iter().enumerate().skip(1).find_map(|(i, a)| {
        let name = a.to_str()?;
        command.find_subcommand(name).map(|s| (i, s))
    }) else {
        return Ok(argv);
    };
    let accepted: BTreeSet<&str> = sub.get_arguments().filter_map(|a| a.get_long()).collect();

    let mut injected = Vec::new();
    for (key, value) in &table {
        let flag = key.replace('_', "-");
        if !accepted.contains(flag.as_str()) {
            warn!("{}: `{key}` does not apply to `{}`", path.display(), sub.get_name());
            continue;
        }
        let value = match value {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    toml::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            other => {
                return Err(Error::config(format!(
                    "{}: unsupported value for `{key}`: {other}",
                    path.display()
                )))
            }
        };
        injected.push(OsString::from(format!("--{flag}")));
        injected.push(OsString::from(value));
    }
    let mut out = argv;
    out.splice(pos + 1..pos + 1, injected);
    Ok(out)
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(f)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildModel(args) => {
            let databases = corpus::parse_database_list(&args.databases)?;
            if !(args.alpha > 0.0 && args.alpha.is_finite()) {
                return Err(Error::config(format!("--alpha must be positive, got {}", args.alpha)));
            }
            with_workers(args.workers, || build_model_cmd(&args, &databases))
        }
        Command::Classify(args) => {
            let plan = Plan::validate(&args.source, Some(&args.thresholds))?;
            with_workers(args.source.workers, || classify_cmd(&args, &plan))
        }
        Command::Evaluate(args) => {
            let plan = Plan::validate(&args.source, Some(&args.thresholds))?;
            let db = DatabaseId::new(args.db.as_str())?;
            with_workers(args.source.workers, || evaluate_cmd(&args, &plan, &db))
        }
        Command::Sweep(args) => {
            let plan = Plan::validate(&args.source, None)?;
            let db = DatabaseId::new(args.db.as_str())?;
            let grid = SweepGrid {
                min_words: parse_list(&args.nt, "--nt")?,
                score_thresholds: parse_list(&args.st, "--st")?,
                min_citations: parse_list(&args.nc, "--nc")?,
                ratio_thresholds: parse_list(&args.rc, "--rc")?,
            };
            with_workers(args.source.workers, || sweep_cmd(&args, &plan, &grid, &db))
        }
    }
}

fn parse_list<T: std::str::FromStr>(list: &str, flag: &str) -> Result<Vec<T>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::config(format!("{flag}: cannot parse {s:?}")))
        })
        .collect()
}

fn build_model_cmd(args: &BuildArgs, databases: &[DatabaseId]) -> Result<()> {
    let tokenizer = load_tokenizer(&args.tokenizer)?;
    let load = corpus::load_records(&args.records)?;
    let model = bayes::build_model(&load.records, databases, &tokenizer, args.alpha)?;
    corpus::save_model(&model, &args.model)?;
    let labeled = load.records.iter().filter(|r| !r.gold_labels.is_empty()).count();
    let docs: Vec<String> = model
        .databases()
        .iter()
        .map(|db| format!("{db}={}", model.doc_count(db).unwrap_or(0)))
        .collect();
    println!(
        "built model from {labeled} labeled of {} records ({} skipped): vocabulary {}, documents {}",
        load.records.len(),
        load.skipped,
        model.vocabulary_size(),
        docs.join(" ")
    );
    Ok(())
}

/// Parameters checked before any file is touched.
struct Plan {
    mode: Mode,
    databases: Vec<DatabaseId>,
    text: TextClassifierConfig,
    cite: CitationClassifierConfig,
}

impl Plan {
    fn validate(source: &SourceArgs, thresholds: Option<&ThresholdArgs>) -> Result<Self> {
        let mode: Mode = source.mode.parse()?;
        let databases = corpus::parse_database_list(&source.databases)?;
        let (text, cite) = match thresholds {
            Some(t) => (
                TextClassifierConfig::new(t.nt, t.st, Default::default(), source.boost)?,
                CitationClassifierConfig::new(t.nc, t.rc)?,
            ),
            None => (
                TextClassifierConfig::new(0, 0.0, Default::default(), source.boost)?,
                CitationClassifierConfig::default(),
            ),
        };
        if mode.uses_citations() && source.citations.is_none() {
            return Err(Error::config(format!("--mode {mode} requires --citations")));
        }
        Ok(Plan {
            mode,
            databases,
            text,
            cite,
        })
    }
}

fn load_tokenizer(args: &TokenizerArgs) -> Result<TokenizerConfig> {
    TokenizerConfig::from_files(
        args.stopwords.as_deref(),
        args.stopphrases.as_deref(),
        DEFAULT_MIN_TOKEN_LENGTH,
    )
}

/// Everything loaded from disk for one run.
struct Loaded {
    records: Vec<BibRecord>,
    skipped: usize,
    tokenizer: TokenizerConfig,
    model: Option<CategoryModel>,
    graph: Option<CitationGraph>,
    databases: Vec<DatabaseId>,
    text: TextClassifierConfig,
}

impl Loaded {
    fn pipeline(&self) -> Pipeline<'_> {
        Pipeline {
            model: self.model.as_ref(),
            tokenizer: &self.tokenizer,
            graph: self.graph.as_ref(),
        }
    }
}

fn load_inputs(source: &SourceArgs, plan: &Plan) -> Result<Loaded> {
    let tokenizer = load_tokenizer(&source.tokenizer)?;
    let model = if plan.mode.uses_text() {
        Some(corpus::load_model(&source.model)?)
    } else {
        None
    };
    let databases = model
        .as_ref()
        .map(|m| m.databases().to_vec())
        .unwrap_or_else(|| plan.databases.clone());

    let mut text = plan.text.clone();
    if let Some(path) = &source.triggers {
        let triggers = corpus::load_triggers(path, &databases)?;
        text = TextClassifierConfig::new(text.min_words(), text.score_threshold(), triggers, text.trigger_boost())?;
        text.check_triggers(&tokenizer)?;
    }

    let load = corpus::load_records(&source.records)?;

    let graph = match (&source.citations, plan.mode.uses_citations()) {
        (Some(path), true) => {
            let external = match &source.memberships {
                Some(m) => corpus::load_memberships(m, &databases)?.memberships,
                None => Default::default(),
            };
            let known = corpus::known_universe(&load.records, &external);
            Some(corpus::load_citations(path, &known)?.0)
        }
        _ => None,
    };

    Ok(Loaded {
        records: load.records,
        skipped: load.skipped,
        tokenizer,
        model,
        graph,
        databases,
        text,
    })
}

fn classify_cmd(args: &ClassifyArgs, plan: &Plan) -> Result<()> {
    let loaded = load_inputs(&args.source, plan)?;
    let assignments = loaded
        .pipeline()
        .assign_all(plan.mode, &loaded.text, &plan.cite, &loaded.records)?;
    emit_assignments(&assignments, &loaded.databases, &args.out)?;
    let assigned = assignments.iter().filter(|a| !a.databases.is_empty()).count();
    println!(
        "classified {} records ({} skipped) in {} mode: {assigned} assigned, {} unassigned",
        assignments.len(),
        loaded.skipped,
        plan.mode,
        assignments.len() - assigned
    );
    Ok(())
}

fn evaluate_cmd(args: &EvaluateArgs, plan: &Plan, db: &DatabaseId) -> Result<()> {
    let loaded = load_inputs(&args.source, plan)?;
    if !loaded.databases.contains(db) {
        return Err(Error::UnknownDatabase(db.to_string()));
    }
    let assignments = loaded
        .pipeline()
        .assign_all(plan.mode, &loaded.text, &plan.cite, &loaded.records)?;
    let gold = evalhub::gold_map(&loaded.records);
    let params = evalhub::Params {
        min_words: plan.mode.uses_text().then_some(args.thresholds.nt),
        score_threshold: plan.mode.uses_text().then_some(args.thresholds.st),
        min_citations: plan.mode.uses_citations().then_some(args.thresholds.nc),
        ratio_threshold: plan.mode.uses_citations().then_some(args.thresholds.rc),
    };
    let report = evalhub::precision_recall(&assignments, &gold, db)?.with_setting(plan.mode, params);
    if let Some(out) = &args.out {
        emit_assignments(&assignments, &loaded.databases, out)?;
    }
    if let Some(grid_out) = &args.grid_out {
        evalhub::emit_grid_csv(std::slice::from_ref(&report), grid_out)?;
    }
    println!(
        "{db} ({} mode, {} records): precision {:.6} recall {:.6} (tp {}, fp {}, fn {})",
        plan.mode,
        assignments.len(),
        report.precision,
        report.recall,
        report.true_positives,
        report.false_positives,
        report.false_negatives
    );
    Ok(())
}

fn sweep_cmd(args: &SweepArgs, plan: &Plan, grid: &SweepGrid, db: &DatabaseId) -> Result<()> {
    let loaded = load_inputs(&args.source, plan)?;
    let reports = evalhub::sweep(&loaded.records, &loaded.pipeline(), &loaded.text, grid, plan.mode, db)?;
    evalhub::emit_grid_csv(&reports, &args.grid_out)?;
    println!(
        "swept {} parameter combinations over {} records in {} mode; wrote {}",
        reports.len(),
        loaded.records.len(),
        plan.mode,
        args.grid_out.display()
    );
    Ok(())
}

/// Renders assignments as `id<TAB>dbs<TAB>via_text<TAB>via_citation`, with
/// each set comma-joined in `databases` order.
pub fn assignments_tsv(assignments: &[Assignment], databases: &[DatabaseId]) -> String {
    let join = |set: &BTreeSet<DatabaseId>| {
        let mut names: Vec<&str> = databases
            .iter()
            .filter(|db| set.contains(*db))
            .map(DatabaseId::as_str)
            .collect();
        // anything outside the configured order goes last, sorted
        names.extend(
            set.iter()
                .filter(|db| !databases.contains(db))
                .map(DatabaseId::as_str),
        );
        names.join(",")
    };
    let mut out = String::new();
    for a in assignments {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            a.record_id,
            join(&a.databases),
            join(&a.via_text),
            join(&a.via_citation)
        );
    }
    out
}

pub fn emit_assignments(
    assignments: &[Assignment],
    databases: &[DatabaseId],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(assignments_tsv(assignments, databases).as_bytes())
        .map_err(|e| Error::io(path, e))
}
