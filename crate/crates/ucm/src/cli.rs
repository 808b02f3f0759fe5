//! `ucm` command line.
//!
//! Exit codes: 0 success, 1 domain failure (lint errors, undefined
//! metrics, pipeline failures), 2 usage error. With `--output json` stdout
//! carries exactly one JSON document and errors go to stderr as
//! `{code, message}`.

use std::fs;
use std::io::{BufRead, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;
use ucm_core::eval::{round2, ElementReport, MatcherConfig};
use ucm_core::model::validate_model;
use ucm_core::pipeline::{export_session, EditKind, EditPayload, ExportFormat};
use ucm_core::prompt::RequestSettings;
use ucm_core::stats::{analyze_paired_times, DEFAULT_ALPHA};
use ucm_core::{
    lint, parse_model, render_model, score_model, Edit, Pipeline, PipelineError, RequirementsDoc,
    Session, Stage, Step, UseCaseModel,
};

use crate::clock::{SystemClock, UuidIds};
use crate::provider::{load_fixture_dir, LiveConfig, LiveProvider, Recording};
use crate::service::{self, AppPipeline, ServiceConfig, SharedProvider};
use crate::store::SessionStore;
use crate::times::read_times;

/// Fixtures shipped with the crate, used when `--fixtures` is not given.
pub const DEFAULT_FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/fixtures");

/// Requirements text the bundled fixtures were recorded against.
pub const BUNDLED_REQUIREMENTS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/requirements/library.txt");

/// Reads a requirements file. The id is the file stem, which is also the
/// title unless one is given.
pub fn load_requirements(path: &Path, title: Option<String>) -> std::io::Result<RequirementsDoc> {
    let text = fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .map_or_else(|| "requirements".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(RequirementsDoc {
        id: stem.clone(),
        title: title.unwrap_or(stem),
        text,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProviderKind {
    Live,
    Replay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputMode {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportKind {
    Puml,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "ucm", version, about = "LLM-assisted use case modeling workbench")]
pub struct Cli {
    /// Completion backend.
    #[arg(long, global = true, value_enum, default_value = "replay")]
    pub provider: ProviderKind,
    /// Fixture directory for replay (and for recording with --record).
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,
    /// Where sessions are stored.
    #[arg(long, global = true, env = "UCM_DATA_DIR", default_value = "ucm-data")]
    pub data_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub output: OutputMode,
    /// Chat-completions URL (overrides UCM_LLM_ENDPOINT).
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    /// Model name sent to the endpoint (overrides UCM_LLM_MODEL).
    #[arg(long = "model-name", global = true)]
    pub model_name: Option<String>,
    /// API key (overrides UCM_LLM_API_KEY).
    #[arg(long, global = true)]
    pub api_key: Option<String>,
    /// With --provider live, save every exchange into the fixture directory.
    #[arg(long, global = true)]
    pub record: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interactive modeling session over a requirements file.
    Run {
        requirements: PathBuf,
        #[arg(long)]
        title: Option<String>,
        /// Use cases to describe, comma separated (default: all).
        #[arg(long, value_delimiter = ',')]
        describe: Option<Vec<String>>,
        /// Confirm every proposal without prompting.
        #[arg(long)]
        yes: bool,
        /// Document printed at the end.
        #[arg(long, value_enum, default_value = "puml")]
        export: ExportKind,
    },
    /// Render a model JSON file as PlantUML.
    Render { model: PathBuf },
    /// Parse a PlantUML file into model JSON.
    Parse { file: PathBuf },
    /// Lint a PlantUML file; exits 1 on error findings.
    Lint { file: PathBuf },
    /// Score a candidate model against a ground truth model.
    Eval {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
        /// JSON list of [truth, candidate] pairs, or a matcher config object.
        #[arg(long)]
        overrides: Option<PathBuf>,
    },
    /// Paired-times statistics from a CSV.
    Stats {
        #[arg(long)]
        times: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Start the REST service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long, default_value = "http://localhost:5173")]
        cors_origin: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: String,
    pub message: String,
    pub exit: i32,
}

impl CliError {
    fn usage(code: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.into(),
            message: message.into(),
            exit: 2,
        }
    }

    fn domain(code: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.into(),
            message: message.into(),
            exit: 1,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::domain(e.code(), e.to_string())
    }
}

struct Io<'a> {
    stdin: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    mode: OutputMode,
}

impl Io<'_> {
    fn json(&mut self, value: &impl serde::Serialize) -> Result<(), CliError> {
        let text = match self.mode {
            OutputMode::Json => serde_json::to_string(value),
            OutputMode::Text => serde_json::to_string_pretty(value),
        }
        .map_err(|e| CliError::domain("E-IO", e.to_string()))?;
        self.line(&text)
    }

    fn line(&mut self, s: &str) -> Result<(), CliError> {
        writeln!(self.out, "{s}").map_err(|e| CliError::domain("E-IO", e.to_string()))
    }

    fn note(&mut self, s: &str) {
        let _ = writeln!(self.err, "{s}");
    }
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            if wants_json(&args) {
                let body = json!({ "code": "E-USAGE", "message": e.to_string().trim() });
                let _ = writeln!(err, "{body}");
            } else {
                let _ = write!(err, "{}", e.render());
            }
            return 2;
        }
    };
    let mut io = Io {
        stdin,
        out,
        err,
        mode: cli.output,
    };
    match dispatch(&cli, &mut io) {
        Ok(code) => code,
        Err(e) => {
            report(&mut io, &e);
            e.exit
        }
    }
}

fn wants_json(args: &[std::ffi::OsString]) -> bool {
    let args: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    args.iter().any(|a| a == "--output=json") || args.windows(2).any(|w| w[0] == "--output" && w[1] == "json")
}

fn report(io: &mut Io<'_>, e: &CliError) {
    match io.mode {
        OutputMode::Json => {
            let body = json!({ "code": e.code, "message": e.message });
            io.note(&body.to_string());
        }
        OutputMode::Text if e.message.starts_with(&e.code) => io.note(&format!("error: {}", e.message)),
        OutputMode::Text => io.note(&format!("error: {}: {}", e.code, e.message)),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage("E-IO", format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::usage("E-BAD-INPUT", format!("{}: {e}", path.display())))
}

fn read_model(path: &Path) -> Result<UseCaseModel, CliError> {
    let model: UseCaseModel = read_json(path)?;
    let v = validate_model(&model);
    if let Some(first) = v.first() {
        return Err(CliError::domain(
            "E-INVALID-MODEL",
            format!("{}: {} violation(s), first: {first}", path.display(), v.len()),
        ));
    }
    Ok(model)
}

fn dispatch(cli: &Cli, io: &mut Io<'_>) -> Result<i32, CliError> {
    match &cli.command {
        Command::Render { model } => {
            let m = read_model(model)?;
            let src = render_model(&m).map_err(|v| CliError::domain("E-INVALID-MODEL", format!("{v:?}")))?;
            match io.mode {
                OutputMode::Text => {
                    write!(io.out, "{src}").map_err(|e| CliError::domain("E-IO", e.to_string()))?;
                }
                OutputMode::Json => io.json(&json!({ "puml": src }))?,
            }
            Ok(0)
        }
        Command::Parse { file } => {
            let src = read_text(file)?;
            let m = parse_model(&src).map_err(|e| CliError::domain(e.code.as_str(), e.to_string()))?;
            io.json(&m)?;
            Ok(0)
        }
        Command::Lint { file } => {
            let src = read_text(file)?;
            let findings = lint(&src);
            let errors = findings.iter().filter(|f| f.is_error()).count();
            match io.mode {
                OutputMode::Json => io.json(&json!({ "findings": findings, "errors": errors }))?,
                OutputMode::Text => {
                    for f in &findings {
                        let sev = serde_json::to_value(f.severity).ok();
                        let sev = sev.as_ref().and_then(|v| v.as_str()).unwrap_or("?");
                        io.line(&format!("{}:{}: {} {sev}: {}", file.display(), f.line, f.code.as_str(), f.message))?;
                    }
                    if findings.is_empty() {
                        io.note("no findings");
                    }
                }
            }
            Ok(if errors > 0 { 1 } else { 0 })
        }
        Command::Eval {
            truth,
            candidate,
            overrides,
        } => eval(io, truth, candidate, overrides.as_deref()),
        Command::Stats { times, alpha } => stats(io, times, *alpha),
        Command::Serve {
            port,
            bind,
            cors_origin,
        } => {
            let config = ServiceConfig {
                bind: SocketAddr::new(*bind, *port),
                data_dir: cli.data_dir.clone(),
                cors_origin: cors_origin.clone(),
            };
            let pipeline = build_pipeline(cli)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::domain("E-IO", e.to_string()))?;
            rt.block_on(service::serve(config, pipeline))
                .map_err(|e| CliError::domain("E-IO", e.to_string()))?;
            Ok(0)
        }
        Command::Run {
            requirements,
            title,
            describe,
            yes,
            export,
        } => {
            let doc = load_requirements(requirements, title.clone())
                .map_err(|e| CliError::usage("E-IO", format!("{}: {e}", requirements.display())))?;
            let store = SessionStore::open(&cli.data_dir).map_err(|e| CliError::domain(e.code(), e.to_string()))?;
            let pipeline = build_pipeline(cli)?;
            interactive(io, &pipeline, &store, doc, describe.as_deref(), *yes, *export)
        }
    }
}

/// Provider selected by the global flags.
pub fn build_provider(cli: &Cli) -> Result<SharedProvider, CliError> {
    let fixtures = cli.fixtures.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_FIXTURES));
    match cli.provider {
        ProviderKind::Replay => {
            if cli.record {
                return Err(CliError::usage("E-USAGE", "--record needs --provider live"));
            }
            let replay = load_fixture_dir(&fixtures).map_err(|e| CliError::domain(e.code(), e.to_string()))?;
            Ok(Arc::new(replay))
        }
        ProviderKind::Live => {
            let mut config = LiveConfig::from_env();
            if let Some(e) = &cli.endpoint {
                config.endpoint = e.clone();
            }
            if let Some(m) = &cli.model_name {
                config.model = Some(m.clone());
            }
            if let Some(k) = &cli.api_key {
                config.api_key = Some(k.clone());
            }
            let live = LiveProvider::new(config);
            Ok(if cli.record {
                Arc::new(Recording::new(live, fixtures))
            } else {
                Arc::new(live)
            })
        }
    }
}

fn build_pipeline(cli: &Cli) -> Result<AppPipeline, CliError> {
    let provider = build_provider(cli)?;
    let mut settings = RequestSettings::default();
    let env_model = std::env::var(crate::provider::ENV_MODEL).ok().filter(|m| !m.is_empty());
    let model = match cli.provider {
        ProviderKind::Replay => cli.model_name.clone(),
        ProviderKind::Live => cli.model_name.clone().or(env_model),
    };
    if let Some(m) = model {
        settings.model_name = m;
    }
    Ok(Pipeline::new(provider, Box::new(SystemClock) as _, Box::new(UuidIds) as _).with_settings(settings))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OverridesFile {
    Pairs(Vec<(String, String)>),
    Config {
        #[serde(default)]
        jaccard_threshold: Option<f64>,
        #[serde(default)]
        synonym_map: Vec<(String, String)>,
        #[serde(default)]
        manual_overrides: Vec<(String, String)>,
    },
}

fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "undef".into(), |x| format!("{:.2}", round2(x)))
}

fn metric_row(label: &str, r: &ElementReport) -> String {
    let m = &r.metrics;
    format!(
        "{label:<10} {:>4} {:>4} {:>4} {:>9} {:>7} {:>5}",
        m.tp,
        m.fp,
        m.fn_,
        fmt_metric(m.precision),
        fmt_metric(m.recall),
        fmt_metric(m.f1)
    )
}

fn eval(io: &mut Io<'_>, truth: &Path, candidate: &Path, overrides: Option<&Path>) -> Result<i32, CliError> {
    let t = read_model(truth)?;
    let c = read_model(candidate)?;
    let mut cfg = MatcherConfig::default();
    if let Some(path) = overrides {
        match read_json::<OverridesFile>(path)? {
            OverridesFile::Pairs(p) => cfg.manual_overrides = p,
            OverridesFile::Config {
                jaccard_threshold,
                synonym_map,
                manual_overrides,
            } => {
                if let Some(th) = jaccard_threshold {
                    cfg.jaccard_threshold = th;
                }
                cfg.synonym_map = synonym_map;
                cfg.manual_overrides = manual_overrides;
            }
        }
        cfg.validate().map_err(|e| CliError::usage("E-BAD-THRESHOLD", e.to_string()))?;
    }
    let report = score_model(&t, &c, &cfg);
    match io.mode {
        OutputMode::Json => io.json(&report)?,
        OutputMode::Text => {
            io.line(&format!(
                "{:<10} {:>4} {:>4} {:>4} {:>9} {:>7} {:>5}",
                "", "tp", "fp", "fn", "precision", "recall", "f1"
            ))?;
            io.line(&metric_row("actors", &report.actor_metrics))?;
            io.line(&metric_row("use cases", &report.usecase_metrics))?;
        }
    }
    if report.has_undefined() {
        report_undefined(io);
        return Ok(1);
    }
    Ok(0)
}

fn report_undefined(io: &mut Io<'_>) {
    let e = CliError::domain("E-UNDEFINED-METRIC", "at least one metric is undefined (zero denominator)");
    report(io, &e);
}

fn stats(io: &mut Io<'_>, times: &Path, alpha: f64) -> Result<i32, CliError> {
    let file = fs::File::open(times).map_err(|e| CliError::usage("E-IO", format!("{}: {e}", times.display())))?;
    let paired = read_times(file).map_err(|e| CliError::domain(e.code(), e.to_string()))?;
    let r = analyze_paired_times(&paired.manual, &paired.assisted, alpha)
        .map_err(|e| CliError::domain(e.code(), e.to_string()))?;
    match io.mode {
        OutputMode::Json => io.json(&r)?,
        OutputMode::Text => {
            let verdict = if r.significant { "significant" } else { "not significant" };
            let lines = [
                format!("{:<14} {}", "participants", r.n),
                format!("{:<14} {:.3} min", "mean manual", r.mean_manual),
                format!("{:<14} {:.3} min", "mean llm", r.mean_assisted),
                format!("{:<14} {:.1} %", "reduction", r.reduction_pct * 100.0),
                format!("{:<14} W = {:.4}, p = {:.4}", "shapiro-wilk", r.shapiro_w, r.shapiro_p),
                format!(
                    "{:<14} t = {:.2}, df = {}, p = {:.4} ({:.6})",
                    "paired t", r.t_stat, r.df, r.p_value, r.p_value
                ),
                format!("{:<14} {} ({verdict})", "alpha", r.alpha),
            ];
            for l in lines {
                io.line(&l)?;
            }
        }
    }
    Ok(0)
}

const HELP: &str = "commands: ok (or empty line) confirm | rm <id> | rename <id> <name> | \
add <name> [-> A1,A2] | link <uc-id> A1,A2 | retry | quit";

fn show(io: &mut Io<'_>, s: &Session, step: Step) {
    let mut lines = Vec::new();
    match step {
        Step::Actors => {
            let list = if s.stage == Stage::ActorsProposed { &s.proposed_actors } else { &s.confirmed_actors };
            lines.push("actors:".to_string());
            for a in list {
                lines.push(format!("  {:<5} {} ({})", a.id, a.name, a.kind.as_str()));
            }
        }
        Step::Usecases => {
            let list = if s.stage == Stage::UsecasesProposed { &s.proposed_usecases } else { &s.confirmed_usecases };
            lines.push("use cases:".to_string());
            for u in list {
                let flag = if s.is_flagged(&u.id, ucm_core::pipeline::F_ORPHANED) { "  [orphaned]" } else { "" };
                lines.push(format!("  {:<5} {}  [{}]{flag}", u.id, u.title, u.actor_ids.join(", ")));
            }
        }
        Step::Model => {
            lines.push("diagram:".to_string());
            lines.extend(s.model_source.iter().flat_map(|src| src.lines().map(|l| format!("  {l}"))));
        }
        Step::Descriptions => {
            for d in &s.descriptions {
                lines.push(format!("{}:", d.usecase_id));
                for (i, step) in d.main_flow.iter().enumerate() {
                    lines.push(format!("  {}. {step}", i + 1));
                }
            }
        }
    }
    for w in s.warnings.iter().filter(|w| w.stage == step) {
        lines.push(format!("  warning {}: {}", w.code, w.message));
    }
    for l in lines {
        io.note(&l);
    }
}

enum Reply {
    Confirm,
    Retry,
    Quit,
    Edits(Vec<Edit>),
    Help,
}

fn split_ids(s: &str) -> Vec<String> {
    s.split([',', ' ']).filter(|x| !x.is_empty()).map(String::from).collect()
}

fn parse_reply(line: &str, step: Step) -> Result<Reply, String> {
    let line = line.trim();
    let (cmd, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let rest = rest.trim();
    Ok(match cmd {
        "" | "ok" | "y" | "yes" | "confirm" => Reply::Confirm,
        "retry" => Reply::Retry,
        "quit" | "q" => Reply::Quit,
        "help" | "?" => Reply::Help,
        "rm" if !rest.is_empty() => Reply::Edits(vec![Edit::remove(step, rest)]),
        "rename" => {
            let (id, name) = rest.split_once(char::is_whitespace).ok_or("usage: rename <id> <name>")?;
            Reply::Edits(vec![Edit::rename(step, id, name.trim())])
        }
        "link" => {
            let (id, actors) = rest.split_once(char::is_whitespace).ok_or("usage: link <uc-id> A1,A2")?;
            Reply::Edits(vec![Edit::relink(step, id, split_ids(actors))])
        }
        "add" if !rest.is_empty() => {
            let (name, actors) = match rest.split_once("->") {
                Some((n, a)) => (n.trim(), Some(split_ids(a))),
                None => (rest, None),
            };
            Reply::Edits(vec![Edit {
                stage: step,
                kind: EditKind::Add,
                target_id: None,
                payload: EditPayload {
                    name: Some(name.to_string()),
                    kind: None,
                    actor_ids: actors,
                },
            }])
        }
        _ => return Err(format!("unrecognized input `{line}`; {HELP}")),
    })
}

/// Line-based gate: show the proposal, apply edits until confirmed.
/// Returns false when the user quits.
fn gate(io: &mut Io<'_>, p: &AppPipeline, s: &mut Session, step: Step, yes: bool) -> Result<bool, CliError> {
    loop {
        show(io, s, step);
        if yes {
            p.confirm(s)?;
            return Ok(true);
        }
        let _ = write!(io.err, "{step}> ");
        let _ = io.err.flush();
        let mut line = String::new();
        let n = io.stdin.read_line(&mut line).map_err(|e| CliError::domain("E-IO", e.to_string()))?;
        let reply = if n == 0 { Ok(Reply::Confirm) } else { parse_reply(&line, step) };
        match reply {
            Err(msg) => io.note(&msg),
            Ok(Reply::Help) => io.note(HELP),
            Ok(Reply::Quit) => return Ok(false),
            Ok(Reply::Retry) => {
                if let Err(e) = p.run_stage(s, step, None) {
                    io.note(&format!("  {e}"));
                }
            }
            Ok(Reply::Confirm) => match p.confirm(s) {
                Ok(()) => return Ok(true),
                Err(e) => io.note(&format!("  {e}")),
            },
            Ok(Reply::Edits(edits)) => {
                if let Err(e) = p.apply_edits(s, &edits) {
                    io.note(&format!("  {e}"));
                }
            }
        }
    }
}

fn interactive(
    io: &mut Io<'_>,
    p: &AppPipeline,
    store: &SessionStore,
    doc: RequirementsDoc,
    describe: Option<&[String]>,
    yes: bool,
    export: ExportKind,
) -> Result<i32, CliError> {
    let mut s = p.start_session(doc)?;
    io.note(&format!("session {}", s.id));
    let save = |s: &Session| store.save(s).map_err(|e| CliError::domain(e.code(), e.to_string()));
    let mut finished = true;
    for step in [Step::Actors, Step::Usecases, Step::Model] {
        let run = p.run_stage(&mut s, step, None);
        save(&s)?;
        run?;
        let go_on = gate(io, p, &mut s, step, yes);
        save(&s)?;
        if !go_on? {
            finished = false;
            break;
        }
    }
    if finished {
        let run = p.run_stage(&mut s, Step::Descriptions, describe);
        save(&s)?;
        run?;
        show(io, &s, Step::Descriptions);
    }
    io.note(&format!("saved to {}", store.path_of(&s.id).display()));
    let format = match export {
        ExportKind::Puml if finished => ExportFormat::Puml,
        _ => ExportFormat::Json,
    };
    let doc = export_session(&s, format)?;
    match (io.mode, format) {
        (OutputMode::Json, ExportFormat::Puml) => io.json(&json!({ "puml": doc }))?,
        (_, ExportFormat::Puml) => write!(io.out, "{doc}").map_err(|e| CliError::domain("E-IO", e.to_string()))?,
        (_, ExportFormat::Json) => io.line(&doc)?,
    }
    Ok(0)
}
