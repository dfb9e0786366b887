//! `wfft`: batch driver for transforms, convolutions, rotation checks and
//! kernel systems on Wiener space.
//!
//! Exit status: 0 when every check passes, 1 when an identity check fails,
//! 2 on a config, precondition or numeric error.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;
use thiserror::Error;

use commands::{Outcome, Rotation, Table};
use config::Overrides;

/// Default output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "WFFT_OUT_DIR";
/// The only field that varies between identical runs.
pub const TIMESTAMP_FIELD: &str = "timestamp";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Lib(#[from] wiener_fft::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "wfft", version, about = "Fourier–Feynman transforms and convolutions on Wiener space")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config for the command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the Monte Carlo sample count.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Overrides the grid size M.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Report file; defaults to `$WFFT_OUT_DIR/<command>.<ext>`, else stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form transform or convolution of an exponential functional.
    Eval {
        #[command(subcommand)]
        op: EvalOp,
    },
    /// Check an identity.
    Verify {
        #[command(subcommand)]
        what: VerifyOp,
    },
    /// Check conditions (i)–(iv) of a kernel system.
    Check {
        #[command(subcommand)]
        what: CheckOp,
    },
    /// Generate a kernel system.
    Gen {
        #[command(subcommand)]
        family: GenOp,
    },
    /// Run a built-in bundle: paper-identities, mc-battery or examples.
    Suite { name: String },
}

#[derive(Debug, Subcommand)]
enum EvalOp {
    /// Fourier–Feynman transform T_{q,k}(F)(y).
    Fft,
    /// Convolution (F * G)_q^{(g₁,g₂;h₁,h₂)}(y).
    Cto,
}

#[derive(Debug, Subcommand)]
enum VerifyOp {
    /// Rotation battery on C₀².
    Rotation2d,
    /// Rotation battery on C₀³.
    Rotation3d,
    /// Transform of a convolution, single-kernel form.
    Thm52,
    /// Transform of a convolution, two-kernel form.
    Thm54,
    /// FFT∘CTO = CTO∘FFT on a kernel system.
    Composed,
}

#[derive(Debug, Subcommand)]
enum CheckOp {
    /// Residuals of conditions (i)–(iv).
    System,
}

#[derive(Debug, Subcommand)]
enum GenOp {
    /// Trigonometric family over a partition A ∪ B.
    Trig,
    /// Haar truncation sweep.
    Haar,
}

impl Command {
    fn label(&self) -> String {
        match self {
            Command::Eval { op } => format!("eval-{}", lower(op)),
            Command::Verify { what } => format!("verify-{}", lower(what)),
            Command::Check { what } => format!("check-{}", lower(what)),
            Command::Gen { family } => format!("gen-{}", lower(family)),
            Command::Suite { name } => format!("suite-{name}"),
        }
    }
}

fn lower(x: &impl std::fmt::Debug) -> String {
    format!("{x:?}").to_lowercase()
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let o = Overrides { seed: cli.seed, n: cli.n, grid: cli.grid };
    let cfg = cli.config.as_deref();
    match &cli.command {
        Command::Eval { op: EvalOp::Fft } => commands::eval_fft(cfg, &o),
        Command::Eval { op: EvalOp::Cto } => commands::eval_cto(cfg, &o),
        Command::Verify { what: VerifyOp::Rotation2d } => commands::verify_rotation(Rotation::TwoD, cfg, &o),
        Command::Verify { what: VerifyOp::Rotation3d } => commands::verify_rotation(Rotation::ThreeD, cfg, &o),
        Command::Verify { what: VerifyOp::Thm52 } => commands::verify_thm52_cmd(cfg, &o),
        Command::Verify { what: VerifyOp::Thm54 } => commands::verify_thm54_cmd(cfg, &o),
        Command::Verify { what: VerifyOp::Composed } => commands::verify_composed(cfg),
        Command::Check { what: CheckOp::System } => commands::check_system_cmd(cfg),
        Command::Gen { family: GenOp::Trig } => commands::gen_trig(cfg, &o),
        Command::Gen { family: GenOp::Haar } => commands::gen_haar(cfg, &o),
        Command::Suite { name } => commands::suite(name, cfg, &o),
    }
}

fn render_json(command: &str, mut report: Value) -> String {
    let stamp = humantime::format_rfc3339_seconds(std::time::SystemTime::now()).to_string();
    let body = match report.as_object_mut() {
        Some(map) => {
            map.insert("command".into(), Value::from(command));
            map.insert(TIMESTAMP_FIELD.into(), Value::from(stamp));
            report
        }
        None => serde_json::json!({"command": command, TIMESTAMP_FIELD: stamp, "result": report}),
    };
    let mut s = serde_json::to_string_pretty(&body).expect("report serializes");
    s.push('\n');
    s
}

fn render_csv(table: &Table) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    w.write_record(&table.header).map_err(err)?;
    for row in &table.rows {
        w.write_record(row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn destination(cli: &Cli, label: &str) -> Option<PathBuf> {
    if let Some(p) = &cli.out {
        return Some(p.clone());
    }
    let ext = match cli.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()).map(|d| Path::new(&d).join(format!("{label}.{ext}")))
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<(), CliError> {
    let label = cli.command.label();
    let text = match cli.format {
        Format::Json => render_json(&label, outcome.report.clone()),
        Format::Csv => match &outcome.table {
            Some(t) => render_csv(t)?,
            None => return Err(CliError::Config(format!("`{label}` has no CSV form"))),
        },
    };
    match destination(cli, &label) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, text)?;
            eprintln!("{label}: {} -> {}", if outcome.pass { "pass" } else { "FAIL" }, path.display());
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|outcome| emit(&cli, &outcome).map(|()| outcome.pass));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("wfft: {e}");
            ExitCode::from(2)
        }
    }
}
