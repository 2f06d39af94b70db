//! `mcqlint`: lint multiple-choice questions for item-writing flaws,
//! compute linguistic metrics and score predictions against gold labels.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mcqlint::batch::{self, Mode};
use mcqlint::corpus::{self, Dataset};
use mcqlint::detectors::DetectorConfig;
use mcqlint::evalharness;
use mcqlint::lingmetrics::{self, GroupTable, PerplexityScorer, TextScope, TrigramModel, UniformScorer};
use mcqlint::llmgate::{self, Gate, HttpBackend, StubBackend};
use mcqlint::report::{self, EvalReport, Format, LintReport, MetricsReport, Provenance, SCHEMA_VERSION};
use mcqlint::textkit::TextKit;

use config::FileConfig;

#[derive(Parser, Debug)]
#[command(name = "mcqlint", version, about = "Item-writing-flaw linter for multiple-choice questions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the 19 flaw detectors over a question file.
    Lint(LintArgs),
    /// Compute perplexity, diversity, grammar errors, Bloom level and
    /// answerability, grouped by domain and flaw band.
    Metrics(MetricsArgs),
    /// Score predictions (a fresh lint or a saved report) against gold labels.
    Evaluate(EvaluateArgs),
    /// Inspect or empty the LLM response cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand, Debug)]
enum CacheAction {
    Stats {
        #[arg(long)]
        cache_dir: PathBuf,
    },
    Clear {
        #[arg(long)]
        cache_dir: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BackendKind {
    Http,
    Stub,
    Disabled,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FormatArg {
    Json,
    Csv,
    Table,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Table => Format::Table,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Questions, one JSON object per line.
    #[arg(long)]
    questions: PathBuf,
    /// Gold labels CSV.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// TOML file with [detectors], [metrics], [llm] and [http] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BackendKind::Disabled)]
    backend: BackendKind,
    /// Stub responses (JSON lines of question_id, purpose, response).
    #[arg(long)]
    fixtures: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    jobs: Option<usize>,
    /// Directory for the LLM response cache.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Remote endpoint URL (backend http).
    #[arg(long)]
    endpoint: Option<String>,
    /// Remote model name (backend http).
    #[arg(long)]
    model: Option<String>,
    /// Record the generation time in reports.
    #[arg(long)]
    timestamps: bool,
    /// Skip LLM verification even when a backend is configured.
    #[arg(long)]
    no_llm: bool,
    /// Overrides `longest_option_ratio`.
    #[arg(long)]
    longest_ratio: Option<f64>,
    /// Overrides `implausible_sim_threshold`.
    #[arg(long)]
    implausible_threshold: Option<f64>,
    /// Overrides `wellformedness_threshold`.
    #[arg(long)]
    wellformedness_threshold: Option<f64>,
    /// Overrides `logical_margin`.
    #[arg(long)]
    logical_margin: Option<f64>,
}

#[derive(Args, Debug)]
struct LintArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ScorerKind {
    Trigram,
    Uniform,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    #[command(flatten)]
    common: Common,
    /// Saved lint report or label CSV supplying flaw bands (instead of gold).
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Ask the backend for answerability.
    #[arg(long)]
    answerability: bool,
    /// Measure the stem only instead of stem and options.
    #[arg(long)]
    stem_only: bool,
    #[arg(long, value_enum, default_value_t = ScorerKind::Trigram)]
    scorer: ScorerKind,
    /// Train the trigram scorer on this file (one sentence per line).
    #[arg(long)]
    lm_corpus: Option<PathBuf>,
    /// Vocabulary size for the uniform scorer.
    #[arg(long, default_value_t = 10_000)]
    uniform_vocab: usize,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// Saved lint report (.json) or label CSV; lints afresh when absent.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

/// Outcome of a command that completed.
enum Status {
    Ok,
    Partial,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Lint(a) => cmd_lint(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Cache { action } => cmd_cache(action),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

struct Setup {
    file: FileConfig,
    detectors: DetectorConfig,
    dataset: Dataset,
    gate: Gate,
    mode: Mode,
}

fn setup(c: &Common) -> anyhow::Result<Setup> {
    let file = FileConfig::load(c.config.as_deref())?;
    let mut detectors = file.detectors.clone();
    if let Some(v) = c.longest_ratio {
        detectors.longest_option_ratio = v;
    }
    if let Some(v) = c.implausible_threshold {
        detectors.implausible_sim_threshold = v;
    }
    if let Some(v) = c.wellformedness_threshold {
        detectors.wellformedness_threshold = v;
    }
    if let Some(v) = c.logical_margin {
        detectors.logical_margin = v;
    }
    if c.no_llm {
        detectors.llm_enabled = false;
    }
    detectors.validate()?;

    let dataset = corpus::load(&c.questions, c.gold.as_deref())?;
    if dataset.questions.is_empty() {
        bail!("no questions in {}", c.questions.display());
    }

    let gate = build_gate(c, &file)?;
    let mode = match c.jobs {
        Some(0) => bail!("--jobs must be at least 1"),
        Some(1) => Mode::Sequential,
        Some(n) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("starting worker pool")?;
            #[cfg(not(feature = "parallel"))]
            log::warn!("--jobs {n} ignored: built without the parallel feature");
            Mode::Parallel
        }
        None => Mode::Parallel,
    };
    Ok(Setup {
        file,
        detectors,
        dataset,
        gate,
        mode,
    })
}

fn build_gate(c: &Common, file: &FileConfig) -> anyhow::Result<Gate> {
    let mut settings = file.llm.clone();
    if c.cache_dir.is_some() {
        settings.cache_dir = c.cache_dir.clone();
    }
    let gate = match c.backend {
        BackendKind::Disabled => Gate::disabled(),
        BackendKind::Stub => {
            let path = c
                .fixtures
                .as_deref()
                .context("backend stub needs --fixtures PATH")?;
            Gate::new(Box::new(StubBackend::load(path)?), settings)?
        }
        BackendKind::Http => {
            let mut http = file.http.clone();
            if let Some(e) = &c.endpoint {
                http.endpoint = e.clone();
            }
            if let Some(m) = &c.model {
                http.model = m.clone();
            }
            let backend = HttpBackend::from_env(http, settings.temperature)?;
            Gate::new(Box::new(backend), settings)?
        }
    };
    Ok(gate)
}

fn provenance(s: &Setup, c: &Common) -> Provenance {
    Provenance::new(&s.detectors, s.gate.backend_id(), s.gate.model(), c.timestamps)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).context("writing to standard output")?;
            so.flush().context("writing to standard output")
        }
    }
}

fn cmd_lint(a: LintArgs) -> anyhow::Result<Status> {
    let c = &a.common;
    let s = setup(c)?;
    let reports = batch::lint(s.mode, &s.dataset, &s.detectors, TextKit::bundled(), &s.gate);
    let report = LintReport::new(provenance(&s, c), reports);
    emit(c.out.as_deref(), &report.render(c.format.into())?)?;
    eprintln!("{}", report.summary.line());
    log_traffic(&s.gate);
    for id in &report.summary.unavailable {
        eprintln!("warning: {id}: some findings are unavailable (LLM gate failure)");
    }
    Ok(if report.summary.unavailable.is_empty() {
        Status::Ok
    } else {
        Status::Partial
    })
}

fn log_traffic(gate: &Gate) {
    if gate.enabled() {
        let t = gate.traffic();
        log::info!(
            "llm requests {}, backend calls {}, cache hits {}, peak in flight {}",
            t.requests,
            t.backend_calls,
            t.cache_hits,
            t.peak_in_flight
        );
    }
}

fn cmd_metrics(a: MetricsArgs) -> anyhow::Result<Status> {
    let c = &a.common;
    let s = setup(c)?;
    let mut mcfg = s.file.metrics.clone();
    if a.stem_only {
        mcfg.scope = TextScope::StemOnly;
    }
    mcfg.answerability |= a.answerability;
    if mcfg.answerability && !s.gate.enabled() {
        eprintln!("warning: answerability needs an LLM backend; the column is left empty");
        mcfg.answerability = false;
    }

    let trained;
    let uniform;
    let scorer: &dyn PerplexityScorer = match (a.scorer, &a.lm_corpus) {
        (ScorerKind::Uniform, _) => {
            uniform = UniformScorer { vocab: a.uniform_vocab };
            &uniform
        }
        (ScorerKind::Trigram, Some(p)) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            trained = TrigramModel::train(text.lines().filter(|l| !l.trim().is_empty()));
            &trained
        }
        (ScorerKind::Trigram, None) => TrigramModel::bundled(),
    };

    let qs = &s.dataset.questions;
    let metrics = batch::metrics(s.mode, qs, TextKit::bundled(), scorer, &s.gate, &mcfg)?;

    let (band_source, counts): (Option<String>, Option<Vec<usize>>) = if let Some(p) = &a.predictions {
        let preds = report::load_predictions(p)?;
        let by_id: std::collections::HashMap<&str, usize> =
            preds.iter().map(|g| (g.question_id.as_str(), g.flaw_count())).collect();
        let missing: Vec<&str> = qs.iter().map(|q| q.id.as_str()).filter(|id| !by_id.contains_key(id)).collect();
        if !missing.is_empty() {
            bail!("{} has no labels for: {}", p.display(), missing.join(", "));
        }
        (Some("predictions".into()), Some(qs.iter().map(|q| by_id[q.id.as_str()]).collect()))
    } else if s.dataset.gold.is_some() {
        let counts = qs
            .iter()
            .map(|q| s.dataset.gold_for(&q.id).map(|g| g.flaw_count()))
            .collect::<Option<Vec<usize>>>();
        match counts {
            Some(c) => (Some("gold".into()), Some(c)),
            None => bail!("gold labels do not cover every question"),
        }
    } else {
        (None, None)
    };
    let groups: Option<GroupTable> = match &counts {
        Some(c) => Some(lingmetrics::group_summaries(qs, c, &metrics)?),
        None => None,
    };

    let report = MetricsReport {
        schema_version: SCHEMA_VERSION.to_string(),
        provenance: provenance(&s, c),
        metrics_config: mcfg,
        scorer: scorer.name().to_string(),
        band_source,
        questions: metrics,
        groups,
    };
    emit(c.out.as_deref(), &report.render(c.format.into())?)?;
    log_traffic(&s.gate);
    Ok(Status::Ok)
}

fn cmd_evaluate(a: EvaluateArgs) -> anyhow::Result<Status> {
    let c = &a.common;
    if c.gold.is_none() {
        bail!("evaluate needs --gold");
    }
    let s = setup(c)?;
    let (preds, source, status) = match &a.predictions {
        Some(p) => (report::load_predictions(p)?, p.display().to_string(), Status::Ok),
        None => {
            let reports = batch::lint(s.mode, &s.dataset, &s.detectors, TextKit::bundled(), &s.gate);
            let partial = reports.iter().any(|r| r.has_unavailable());
            let status = if partial { Status::Partial } else { Status::Ok };
            (evalharness::predictions_from_reports(&reports), "lint".to_string(), status)
        }
    };
    let summary = evalharness::evaluate(&s.dataset, &preds)?;
    let o = &summary.overall;
    eprintln!(
        "accuracy {:.4}, exact match {:.4}, hamming {:.4}, acceptability match {:.4}",
        o.overall_accuracy, o.exact_match_ratio, o.hamming_loss, o.match_rate
    );
    let report = EvalReport {
        schema_version: SCHEMA_VERSION.to_string(),
        provenance: provenance(&s, c),
        predictions: source,
        summary,
    };
    emit(c.out.as_deref(), &report.render(c.format.into())?)?;
    Ok(status)
}

fn cmd_cache(action: CacheAction) -> anyhow::Result<Status> {
    match action {
        CacheAction::Stats { cache_dir } => {
            if !cache_dir.is_dir() {
                bail!("cache directory {} does not exist", cache_dir.display());
            }
            let st = llmgate::cache::stats(&cache_dir)?;
            println!("entries {}", st.entries);
            println!("bytes {}", st.bytes);
            if st.corrupt_lines > 0 {
                println!("corrupt lines {}", st.corrupt_lines);
            }
        }
        CacheAction::Clear { cache_dir } => {
            llmgate::cache::clear(&cache_dir)?;
            println!("cleared {}", cache_dir.display());
        }
    }
    Ok(Status::Ok)
}
