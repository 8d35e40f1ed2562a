//! `nash-horizon <subcommand> --config FILE [--out DIR] [--seed-override N] [--threads K]`
//!
//! Exit status: 0 when every asserted tolerance passes, 1 on a failed
//! tolerance or a numerical failure, 2 on a schema violation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::ExperimentConfig;
use output::{content_hash, Outcome, OutputDir};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] nash_core::Error),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "nash-horizon", version, about = "Experiments on finite-dimensional Nash systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed_override: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Certify β⋆β ≤ cβ for a weight sequence.
    CertifyWeights(RunArgs),
    /// Picard iteration for a game.
    Solve(RunArgs),
    /// Contraction probes over a list of horizons.
    ScanHorizon(RunArgs),
    /// Decay constants of a linear problem, with optional refinement,
    /// horizon and Monte Carlo cross-checks.
    VerifyDecay(RunArgs),
    /// Gradient-mass growth of a Fokker–Planck density.
    FpkDiagnostic(RunArgs),
    /// Picard solution against the Riccati oracle.
    OracleCompare(RunArgs),
    /// Differences between games of increasing size.
    Stability(RunArgs),
    /// Fixed points from two starting points.
    Uniqueness(RunArgs),
}

impl Command {
    fn split(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::CertifyWeights(a) => ("certify-weights", a),
            Command::Solve(a) => ("solve", a),
            Command::ScanHorizon(a) => ("scan-horizon", a),
            Command::VerifyDecay(a) => ("verify-decay", a),
            Command::FpkDiagnostic(a) => ("fpk-diagnostic", a),
            Command::OracleCompare(a) => ("oracle-compare", a),
            Command::Stability(a) => ("stability", a),
            Command::Uniqueness(a) => ("uniqueness", a),
        }
    }
}

fn load(name: &str, args: &RunArgs) -> Result<(ExperimentConfig, PathBuf), RunError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| RunError::Schema(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| RunError::Schema(e.to_string()))?;
    if let Some(s) = &cfg.subcommand {
        if s != name {
            return Err(RunError::Schema(format!("config is for `{s}`, not `{name}`")));
        }
    }
    cfg.subcommand = Some(name.into());
    if let Some(seed) = args.seed_override {
        cfg.seed = Some(seed);
    }
    if name == "scan-horizon" && cfg.seed.is_none() {
        cfg.seed = Some(0);
    }
    if let (Some(game), Some(grid)) = (cfg.game.as_mut(), cfg.grid.as_ref()) {
        let beta = cfg.weights.build()?;
        game.resolve(&beta, grid)?;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .ok_or_else(|| RunError::Schema("no output directory: pass --out or set `out`".into()))?;
    Ok((cfg, out))
}

fn dispatch(name: &str, cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    match name {
        "certify-weights" => commands::certify_weights(cfg, out),
        "solve" => commands::solve(cfg, out),
        "scan-horizon" => commands::scan_horizon(cfg, out),
        "verify-decay" => commands::verify_decay_cmd(cfg, out),
        "fpk-diagnostic" => commands::fpk_diagnostic(cfg, out),
        "oracle-compare" => commands::oracle_compare(cfg, out),
        "stability" => commands::stability(cfg, out),
        "uniqueness" => commands::uniqueness(cfg, out),
        _ => unreachable!("clap only yields known subcommands"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = cli.command.split();

    let (cfg, out_path) = match load(name, args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let threads = args.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        eprintln!("schema violation: --threads must be at least 1");
        return ExitCode::from(2);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("cannot start worker pool: {e}");
        return ExitCode::from(1);
    }
    let mut out = match OutputDir::create(&out_path) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };

    let started = Instant::now();
    let result = dispatch(name, &cfg, &mut out);
    let mut summary = json!({
        "tool": "nash-horizon",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": name,
        "config": cfg,
        "config_sha256": content_hash(&cfg),
        "seed": cfg.seed,
        "threads": threads,
        "elapsed_seconds": started.elapsed().as_secs_f64(),
    });
    let code = match result {
        Ok(o) => {
            let passed = o.passed();
            summary["status"] = json!(if passed { "passed" } else { "failed" });
            summary["checks"] = json!(o.checks);
            summary["results"] = serde_json::Value::Object(o.results);
            for c in summary["checks"].as_array().into_iter().flatten() {
                let mark = if c["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
                println!("{mark} {}: {} (threshold {})", c["name"].as_str().unwrap_or(""), c["value"], c["threshold"]);
            }
            if passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("{e}");
            let (status, code) = match e {
                RunError::Schema(_) => ("schema_violation", 2),
                _ => ("numerical_failure", 1),
            };
            summary["status"] = json!(status);
            summary["error"] = json!(e.to_string());
            if let RunError::Numerical(inner) = &e {
                summary["diagnostic"] = json!(format!("{inner:?}"));
            }
            code
        }
    };
    summary["files"] = json!(out.files());
    if let Err(e) = out.summary(&summary) {
        eprintln!("{e}");
        return ExitCode::from(1);
    }
    println!("{}: {}", name, summary["status"].as_str().unwrap_or(""));
    ExitCode::from(code)
}
