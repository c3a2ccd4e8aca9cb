//! Command-line entry point. Exit codes: 0 on success, 1 when a check
//! reaches a negative verdict (inconsistent library), 2 on usage or input
//! errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::abstraction::{
    abstract_events, AbstractionResult, EmbeddingClientProvider, LexicalProvider,
    SimilarityProvider, TableDrivenProvider,
};
use crate::ast::{
    rational_from_str, EventId, QuantInterpretation, Rational, RuleLibrary, TimestampVar,
};
use crate::consistency::{check_qualitative, check_quantitative, emit_smtlib, ConsistencyReport};
use crate::data::{load_dataset, scoped_event_metrics};
use crate::parser::{parse_library, print_library, print_rule};
use crate::pipeline::{convert, HttpBackend, HttpBackendConfig, MockBackend, TransformerBackend};
use crate::semantics::{pr_exact, pr_library};

#[derive(Parser)]
#[command(
    name = "horae",
    about = "Parse, check, score, and convert regulation-rule libraries",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckMode {
    Qual,
    Quant,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProviderKind {
    Lexical,
    Table,
    Embed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimilarityKind {
    Lexical,
    Embed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Mock,
    Http,
}

#[derive(Args)]
struct AbstractionArgs {
    /// Table-driven judgment file (JSON array of {a, b, relation, score}).
    #[arg(long)]
    abstraction: Option<PathBuf>,
    /// Minimum similarity score for accepting a judgment.
    #[arg(long, default_value_t = 0.85)]
    threshold: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a .hor file and pretty-print it.
    Parse {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Check qualitative or quantitative consistency.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = CheckMode::Qual)]
        mode: CheckMode,
        #[command(flatten)]
        abstraction: AbstractionArgs,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Compute the library satisfaction probability under an assignment.
    Prob {
        file: PathBuf,
        /// JSON file {"events": {id: p}, "timestamps": {name: value}}.
        #[arg(long)]
        assign: PathBuf,
        /// Use the exact enumeration oracle instead of the recursion.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Emit an SMT-LIB2 script for external solving.
    EmitSmt {
        file: PathBuf,
        #[command(flatten)]
        abstraction: AbstractionArgs,
    },
    /// Abstract correlated events into proposition classes.
    Abstract {
        file: PathBuf,
        #[arg(long, value_enum)]
        provider: ProviderKind,
        /// Judgment file for the table provider.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long, default_value_t = 0.85)]
        threshold: f64,
        /// Embedding service base URL (defaults to $HORAE_EMBED_URL).
        #[arg(long)]
        embed_url: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Dataset utilities.
    Dataset {
        #[command(subcommand)]
        command: DatasetCommand,
    },
    /// Score generated events against gold events (precision/recall/F1).
    Metrics {
        /// Generated records (JSON array in the dataset format).
        #[arg(long)]
        pred: PathBuf,
        /// Gold records (JSON array in the dataset format).
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, value_enum, default_value_t = SimilarityKind::Lexical)]
        similarity: SimilarityKind,
        #[arg(long)]
        embed_url: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Convert natural-language rules (one per line) through the pipeline.
    Convert {
        rules: PathBuf,
        #[arg(long, value_enum)]
        backend: BackendKind,
        /// Mock fixture file (JSON map from prompt to response).
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Completion service base URL (defaults to $HORAE_BACKEND_URL).
        #[arg(long)]
        url: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Validate record shapes and invariants.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
}

/// Runs the CLI; returns the process exit code.
pub fn run<I: IntoIterator<Item = String>>(argv: I) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            // Help and version requests are successful terminations.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    }
}

fn dispatch(command: Command) -> Result<i32, String> {
    match command {
        Command::Parse { file, format } => cmd_parse(&file, format),
        Command::Check {
            file,
            mode,
            abstraction,
            format,
        } => cmd_check(&file, mode, &abstraction, format),
        Command::Prob {
            file,
            assign,
            exact,
            format,
        } => cmd_prob(&file, &assign, exact, format),
        Command::EmitSmt { file, abstraction } => cmd_emit_smt(&file, &abstraction),
        Command::Abstract {
            file,
            provider,
            pairs,
            threshold,
            embed_url,
            format,
        } => cmd_abstract(&file, provider, pairs.as_deref(), threshold, embed_url, format),
        Command::Dataset { command } => match command {
            DatasetCommand::Validate { file, format } => cmd_dataset_validate(&file, format),
        },
        Command::Metrics {
            pred,
            gold,
            similarity,
            embed_url,
            format,
        } => cmd_metrics(&pred, &gold, similarity, embed_url, format),
        Command::Convert {
            rules,
            backend,
            fixture,
            url,
            format,
        } => cmd_convert(&rules, backend, fixture.as_deref(), url, format),
    }
}

fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_library(path: &Path) -> Result<RuleLibrary, String> {
    let src = read_file(path)?;
    parse_library(&src).map_err(|e| format!("{}: {e}", path.display()))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize infallibly")
}

fn cmd_parse(file: &Path, format: Format) -> Result<i32, String> {
    let lib = load_library(file)?;
    match format {
        Format::Human => {
            print!("{}", print_library(&lib));
            let other: Vec<&str> = lib
                .events()
                .iter()
                .filter(|(_, ev)| ev.pattern == crate::ast::EventPattern::Other)
                .map(|(id, _)| id.as_str())
                .collect();
            if !other.is_empty() {
                eprintln!(
                    "note: {} event(s) with unrecognized pattern: {}",
                    other.len(),
                    other.join(", ")
                );
            }
        }
        Format::Json => println!("{}", to_json(&lib)),
    }
    Ok(0)
}

fn load_abstraction(
    lib: &RuleLibrary,
    args: &AbstractionArgs,
) -> Result<Option<AbstractionResult>, String> {
    match &args.abstraction {
        None => Ok(None),
        Some(path) => {
            let json = read_file(path)?;
            let provider = TableDrivenProvider::from_json(&json)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            let result =
                abstract_events(lib, &provider, args.threshold).map_err(|e| e.to_string())?;
            Ok(Some(result))
        }
    }
}

fn print_report(report: &ConsistencyReport, format: Format) -> i32 {
    match format {
        Format::Human => {
            match report.verdict {
                crate::consistency::Verdict::Consistent => println!("verdict: consistent"),
                crate::consistency::Verdict::Inconsistent => println!("verdict: inconsistent"),
            }
            match &report.witness {
                Some(crate::consistency::Witness::Qualitative(w)) => {
                    for (id, value) in &w.event_vals {
                        println!("  {id} = {value}");
                    }
                    for (ts, value) in &w.time_vals {
                        println!("  {ts} = {}", crate::ast::format_rational(value));
                    }
                }
                Some(crate::consistency::Witness::Quantitative(w)) => {
                    for (id, p) in &w.event_probs {
                        println!("  p({id}) = {p}");
                    }
                    for (ts, value) in &w.time_vals {
                        println!("  {ts} = {}", crate::ast::format_rational(value));
                    }
                }
                None => {}
            }
            if let Some(core) = &report.conflict_core {
                println!("conflict core: {}", core.join(", "));
            }
        }
        Format::Json => println!("{}", to_json(report)),
    }
    if report.is_consistent() {
        0
    } else {
        1
    }
}

fn cmd_check(
    file: &Path,
    mode: CheckMode,
    abstraction: &AbstractionArgs,
    format: Format,
) -> Result<i32, String> {
    let lib = load_library(file)?;
    let abs = load_abstraction(&lib, abstraction)?;
    let report = match mode {
        CheckMode::Qual => check_qualitative(&lib, abs.as_ref()),
        CheckMode::Quant => check_quantitative(&lib, abs.as_ref()),
    }
    .map_err(|e| e.to_string())?;
    Ok(print_report(&report, format))
}

/// Assignment file: {"events": {id: number}, "timestamps": {name: value}}
/// where a value is a JSON number or an exact string ("7/2", "3.5").
fn load_assignment(path: &Path) -> Result<QuantInterpretation, String> {
    let json = read_file(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&json).map_err(|e| format!("{}: {e}", path.display()))?;
    let object = value
        .as_object()
        .ok_or("assignment file must be a JSON object")?;
    let mut event_probs: BTreeMap<EventId, f64> = BTreeMap::new();
    if let Some(events) = object.get("events") {
        let map = events
            .as_object()
            .ok_or("\"events\" must map event ids to probabilities")?;
        for (id, p) in map {
            let p = p
                .as_f64()
                .ok_or_else(|| format!("probability for {id} is not a number"))?;
            event_probs.insert(EventId(id.clone()), p);
        }
    }
    let mut time_vals: BTreeMap<TimestampVar, Rational> = BTreeMap::new();
    if let Some(times) = object.get("timestamps") {
        let map = times
            .as_object()
            .ok_or("\"timestamps\" must map names to values")?;
        for (name, value) in map {
            let rational = match value {
                serde_json::Value::Number(n) => {
                    let f = n.as_f64().ok_or_else(|| format!("bad number for {name}"))?;
                    Rational::from_float(f)
                        .ok_or_else(|| format!("timestamp {name} is not finite"))?
                }
                serde_json::Value::String(s) => rational_from_str(s)
                    .ok_or_else(|| format!("timestamp {name} is not a rational: {s}"))?,
                _ => return Err(format!("timestamp {name} must be a number or string")),
            };
            time_vals.insert(TimestampVar(name.clone()), rational);
        }
    }
    QuantInterpretation::new(event_probs, time_vals).map_err(|e| e.to_string())
}

fn cmd_prob(file: &Path, assign: &Path, exact: bool, format: Format) -> Result<i32, String> {
    let lib = load_library(file)?;
    let interp = load_assignment(assign)?;
    let probability = if exact {
        let mut product = 1.0;
        for s in lib.statements() {
            product *= pr_exact(s, &interp).map_err(|e| e.to_string())?;
        }
        product
    } else {
        pr_library(&lib, &interp).map_err(|e| e.to_string())?
    };
    match format {
        Format::Human => println!("{probability:.12}"),
        Format::Json => println!(
            "{}",
            serde_json::json!({ "probability": probability, "exact_oracle": exact })
        ),
    }
    Ok(0)
}

fn cmd_emit_smt(file: &Path, abstraction: &AbstractionArgs) -> Result<i32, String> {
    let lib = load_library(file)?;
    let abs = load_abstraction(&lib, abstraction)?;
    let script = emit_smtlib(&lib, abs.as_ref()).map_err(|e| e.to_string())?;
    print!("{script}");
    Ok(0)
}

fn embed_url_or_env(explicit: Option<String>) -> Result<String, String> {
    explicit
        .or_else(|| std::env::var("HORAE_EMBED_URL").ok())
        .ok_or_else(|| "embedding provider needs --embed-url or $HORAE_EMBED_URL".to_owned())
}

fn cmd_abstract(
    file: &Path,
    provider: ProviderKind,
    pairs: Option<&Path>,
    threshold: f64,
    embed_url: Option<String>,
    format: Format,
) -> Result<i32, String> {
    let lib = load_library(file)?;
    let provider: Box<dyn SimilarityProvider> = match provider {
        ProviderKind::Lexical => Box::new(LexicalProvider),
        ProviderKind::Table => {
            let path = pairs.ok_or("--provider table requires --pairs")?;
            let json = read_file(path)?;
            Box::new(
                TableDrivenProvider::from_json(&json)
                    .map_err(|e| format!("{}: {e}", path.display()))?,
            )
        }
        ProviderKind::Embed => Box::new(EmbeddingClientProvider::new(
            embed_url_or_env(embed_url)?,
            threshold,
        )),
    };
    let result = abstract_events(&lib, provider.as_ref(), threshold).map_err(|e| e.to_string())?;
    match format {
        Format::Human => {
            println!(
                "{} events in {} classes",
                lib.events().len(),
                result.class_count()
            );
            for (class, members) in result.members().iter().enumerate() {
                let rendered: Vec<String> = members
                    .iter()
                    .map(|(id, polarity)| format!("{}{id}", if *polarity > 0 { "+" } else { "-" }))
                    .collect();
                println!(
                    "  class {class} (rep {}): {}",
                    result.representative(class),
                    rendered.join(", ")
                );
            }
        }
        Format::Json => println!("{}", to_json(&result)),
    }
    Ok(0)
}

fn cmd_dataset_validate(file: &Path, format: Format) -> Result<i32, String> {
    let json = read_file(file)?;
    let records = load_dataset(&json).map_err(|e| format!("{}: {e}", file.display()))?;
    let count = |shape: &str| records.iter().filter(|r| r.shape_name() == shape).count();
    match format {
        Format::Human => {
            println!(
                "{} records: {} validation, {} composite, {} single-event",
                records.len(),
                count("validation"),
                count("composite"),
                count("single-event")
            );
        }
        Format::Json => {
            println!(
                "{}",
                serde_json::json!({
                    "records": records.len(),
                    "validation": count("validation"),
                    "composite": count("composite"),
                    "single_event": count("single-event"),
                })
            );
        }
    }
    Ok(0)
}

fn cmd_metrics(
    pred: &Path,
    gold: &Path,
    similarity: SimilarityKind,
    embed_url: Option<String>,
    format: Format,
) -> Result<i32, String> {
    let pred_records = load_dataset(&read_file(pred)?).map_err(|e| e.to_string())?;
    let gold_records = load_dataset(&read_file(gold)?).map_err(|e| e.to_string())?;
    if pred_records.len() != gold_records.len() {
        return Err(format!(
            "record counts differ: {} generated vs {} gold",
            pred_records.len(),
            gold_records.len()
        ));
    }
    let scopes: Vec<(Vec<String>, Vec<String>)> = pred_records
        .iter()
        .zip(&gold_records)
        .map(|(p, g)| (p.basic_events().to_vec(), g.basic_events().to_vec()))
        .collect();
    let report = match similarity {
        SimilarityKind::Lexical => {
            scoped_event_metrics(&scopes, &crate::abstraction::lexical_similarity)
        }
        SimilarityKind::Embed => {
            let provider = EmbeddingClientProvider::new(embed_url_or_env(embed_url)?, 0.0);
            let sim = move |a: &str, b: &str| embed_similarity(&provider, a, b);
            scoped_event_metrics(&scopes, &sim)
        }
    };
    match format {
        Format::Human => {
            println!("precision: {:.4}", report.precision);
            println!("recall:    {:.4}", report.recall);
            println!("f1:        {:.4}", report.f1);
            for flag in &report.flags {
                println!("flag: {flag}");
            }
        }
        Format::Json => println!("{}", to_json(&report)),
    }
    Ok(0)
}

/// Similarity through the embedding client, for metric scoring. Transport
/// errors score zero rather than aborting a long evaluation.
fn embed_similarity(provider: &EmbeddingClientProvider, a: &str, b: &str) -> f64 {
    use crate::ast::{BasicEvent, ComponentKind, EventComponent};
    let wrap = |text: &str, id: &str| {
        EventComponent::new(ComponentKind::Object, text)
            .ok()
            .and_then(|c| BasicEvent::new(EventId::from(id), vec![c], None, None).ok())
    };
    match (wrap(a, "a"), wrap(b, "b")) {
        (Some(ea), Some(eb)) => provider.judge(&ea, &eb).map_or(0.0, |j| j.score),
        _ => 0.0,
    }
}

fn cmd_convert(
    rules: &Path,
    backend: BackendKind,
    fixture: Option<&Path>,
    url: Option<String>,
    format: Format,
) -> Result<i32, String> {
    let backend: Box<dyn TransformerBackend> = match backend {
        BackendKind::Mock => {
            let path = fixture.ok_or("--backend mock requires --fixture")?;
            let json = read_file(path)?;
            Box::new(
                MockBackend::from_json(&json).map_err(|e| format!("{}: {e}", path.display()))?,
            )
        }
        BackendKind::Http => {
            let config = match url {
                Some(base) => HttpBackendConfig::new(base),
                None => HttpBackendConfig::from_env()
                    .ok_or("--backend http requires --url or $HORAE_BACKEND_URL")?,
            };
            Box::new(HttpBackend::new(config))
        }
    };
    let text = read_file(rules)?;
    let mut results = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let result = convert(line, backend.as_ref()).map_err(|e| e.to_string())?;
        results.push(result);
    }
    match format {
        Format::Human => {
            for result in &results {
                println!("{};", print_rule(&result.rule, result.library.events()));
                for warning in &result.warnings {
                    eprintln!("warning: {warning}");
                }
            }
        }
        Format::Json => println!("{}", to_json(&results)),
    }
    Ok(0)
}
