//! Command-line experiment runner for the `ginexpm` solvers.
//!
//! `generate` writes an instance, `sweep-gamma3` and `compare` produce the
//! two result tables as CSV, and `verify` re-evaluates the convergence
//! monitors on a run (fresh or from a saved log).
//!
//! Exit codes: 0 success, 1 bad usage, 2 a run failed, 3 a monitor was
//! violated.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod report;

use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Run(String),
    #[error("monitor violation: {0}")]
    Monitor(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Run(_) => 2,
            Self::Monitor(_) => 3,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Run(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Run(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "ginexpm", version, about = "Gradient methods with inexact projections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded least-squares instance.
    Generate(Flags),
    /// Constant-step runs over a list of gamma3 values.
    #[command(name = "sweep-gamma3")]
    SweepGamma3(Flags),
    /// Constant step and Armijo, each with inexact and exact projections.
    Compare(Flags),
    /// Re-evaluate the convergence monitors of a run.
    Verify {
        #[command(flatten)]
        flags: Flags,
        /// Saved run log to check instead of running.
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

/// Every flag overrides the matching key of `--config`.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// `key = value` file applied before the other flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// constant | armijo
    #[arg(long)]
    pub algo: Option<String>,
    /// inexact | exact
    #[arg(long)]
    pub proj: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    /// Number of rows of A (default 2n).
    #[arg(long)]
    pub m: Option<String>,
    /// Rank of the planted solution.
    #[arg(long)]
    pub omega: Option<String>,
    #[arg(long)]
    pub density: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Load this instance instead of generating one.
    #[arg(long)]
    pub instance: Option<String>,
    /// Comma-separated starting-point weights.
    #[arg(long)]
    pub beta: Option<String>,
    /// Comma-separated inexactness levels.
    #[arg(long)]
    pub gamma3: Option<String>,
    /// harmonic | logarithmic
    #[arg(long)]
    pub schedule: Option<String>,
    #[arg(long)]
    pub bbar: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<String>,
    /// Abort a run on the first monitor violation.
    #[arg(long)]
    pub strict: bool,
    /// CSV output (stdout when absent); the instance for `generate`.
    #[arg(long)]
    pub out: Option<String>,
    /// JSON report or run log.
    #[arg(long)]
    pub json: Option<String>,
}

impl Flags {
    pub fn to_config(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            cfg.apply_kv(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        }
        let pairs = [
            ("algo", &self.algo),
            ("proj", &self.proj),
            ("n", &self.n),
            ("m", &self.m),
            ("omega", &self.omega),
            ("density", &self.density),
            ("seed", &self.seed),
            ("instance", &self.instance),
            ("beta", &self.beta),
            ("gamma3", &self.gamma3),
            ("schedule", &self.schedule),
            ("bbar", &self.bbar),
            ("tol", &self.tol),
            ("max-iter", &self.max_iter),
            ("out", &self.out),
            ("json", &self.json),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.strict {
            cfg.strict = true;
        }
        Ok(cfg)
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Run(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Run(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

fn finish(report: &report::RunReport) -> Result<(), CliError> {
    if report.any_strict_violation() {
        return Err(CliError::Monitor("a strict run stopped on a violated inequality".into()));
    }
    if report.any_error() {
        return Err(CliError::Run("at least one run failed, see the error column".into()));
    }
    Ok(())
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate(flags) => {
            commands::cmd_generate(&flags.to_config()?)?;
        }
        Command::SweepGamma3(flags) => {
            let cfg = flags.to_config()?;
            let report = commands::cmd_sweep_gamma3(&cfg)?;
            report::write_sweep_csv(&report, output(&cfg.out)?)?;
            if let Some(p) = &cfg.json {
                write_json(p, &report)?;
            }
            finish(&report)?;
        }
        Command::Compare(flags) => {
            let cfg = flags.to_config()?;
            let report = commands::cmd_compare(&cfg)?;
            report::write_compare_csv(&report, output(&cfg.out)?)?;
            if let Some(p) = &cfg.json {
                write_json(p, &report)?;
            }
            finish(&report)?;
        }
        Command::Verify { flags, records } => {
            let cfg = flags.to_config()?;
            let (summary, logs) = commands::cmd_verify(&cfg, records.as_deref())?;
            if let Some(p) = &cfg.json {
                match logs.as_slice() {
                    [] => {}
                    [log] => write_json(p, log)?,
                    many => write_json(p, &many)?,
                }
            }
            let mut out = output(&cfg.out)?;
            serde_json::to_writer_pretty(&mut out, &summary).map_err(|e| CliError::Run(e.to_string()))?;
            writeln!(out)?;
            out.flush()?;
            if !summary.passed {
                let failed: Vec<String> = summary
                    .entries
                    .iter()
                    .filter(|e| !e.passed)
                    .map(|e| format!("{} beta={}", e.variant, e.beta))
                    .collect();
                return Err(CliError::Monitor(failed.join(", ")));
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ginexpm: {e}");
            e.exit_code()
        }
    }
}
