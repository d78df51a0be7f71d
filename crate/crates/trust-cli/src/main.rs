//! Command-line harness for the trust-models toolkit.
//!
//! Subcommands: `simulate` (scenario config -> trace file), `infer` (model +
//! trace -> per-step results CSV), `compare` (several models + trace ->
//! aligned report with per-model summaries). All outputs are deterministic
//! functions of (config, trace, seed). Exit codes: 0 success, 1
//! runtime/model error, 2 configuration error.

mod compare;
mod config;
mod error;
mod infer;
mod models;
mod simulate;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;
use error::{config_err, run_err, Result};
use models::ModelKind;
use trust_models::Trace;

#[derive(Parser)]
#[command(name = "trust-cli", version, about = "Bayesian trust inference harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file's `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config overrides as key=value; highest precedence.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an interaction trace from a scenario config.
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run one inference backend over a trace.
    Infer {
        /// Trace file produced by `simulate`.
        trace: PathBuf,
        /// Inference backend: bdtm, ddtm, gbt-pf, sstm, sstm-ipf or sltm.
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run several backends over a trace and compare them to ground truth.
    Compare {
        /// Trace file produced by `simulate`.
        trace: PathBuf,
        /// Backend to include; repeat or comma-separate for several.
        #[arg(long)]
        model: Vec<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn load_config(common: &CommonOpts) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => Config::from_file(path)?,
        None => Config::default(),
    };
    for pair in &common.set {
        cfg.set_pair(pair)?;
    }
    if let Some(seed) = common.seed {
        cfg.set("seed", seed);
    }
    Ok(cfg)
}

fn load_trace(path: &Path) -> Result<Trace> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| run_err(format!("cannot read trace {}: {e}", path.display())))?;
    Trace::parse(&text).map_err(|e| run_err(e.to_string()))
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| run_err(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| run_err(format!("cannot write to stdout: {e}")))
        }
    }
}

fn model_kinds(flags: &[String], cfg: &Config) -> Result<Vec<ModelKind>> {
    let mut names: Vec<String> = flags
        .iter()
        .flat_map(|f| f.split(','))
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        if let Some(listed) = cfg.get("models").or_else(|| cfg.get("model")) {
            names = listed
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
        }
    }
    if names.is_empty() {
        return Err(config_err(
            "no model selected (use --model or the model/models config key)",
        ));
    }
    names.iter().map(|n| ModelKind::parse(n)).collect()
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common } => {
            let cfg = load_config(&common)?;
            let seed = cfg.get_u64("seed", 0)?;
            let trace = simulate::build_trace(&cfg, seed)?;
            write_output(&common.out, &trace.to_string())
        }
        Command::Infer {
            trace,
            model,
            common,
        } => {
            let cfg = load_config(&common)?;
            let kinds = model_kinds(model.as_slice(), &cfg)?;
            let [kind] = kinds.as_slice() else {
                return Err(config_err("infer takes exactly one --model"));
            };
            let trace = load_trace(&trace)?;
            let seed = match cfg.get("seed") {
                Some(_) => cfg.get_u64("seed", 0)?,
                None => trace.header.seed,
            };
            let csv = infer::run(&cfg, *kind, seed, &trace)?;
            write_output(&common.out, &csv)
        }
        Command::Compare {
            trace,
            model,
            common,
        } => {
            let cfg = load_config(&common)?;
            let kinds = model_kinds(&model, &cfg)?;
            let trace = load_trace(&trace)?;
            let seed = match cfg.get("seed") {
                Some(_) => cfg.get_u64("seed", 0)?,
                None => trace.header.seed,
            };
            let report = compare::run(&cfg, &kinds, seed, &trace)?;
            write_output(&common.out, &report)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}