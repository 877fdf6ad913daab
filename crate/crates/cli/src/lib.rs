//! Command-line front end: wires ingestion, dependency parsing, the
//! entropy engines, and report generation into `profile`, `plan`, and
//! `bench` subcommands.

pub mod bench;
pub mod plan;
pub mod profile;

use std::fmt;
use std::fs;
use std::path::Path;

use clap::{Parser, Subcommand};
use plaque_core::{EntropyError, SatisfactionError};

pub const EXIT_OK: u8 = 0;
/// Unreadable or malformed inputs, bad parameters.
pub const EXIT_INPUT: u8 = 2;
/// The instance does not satisfy the given dependencies.
pub const EXIT_VIOLATION: u8 = 3;
/// An exact engine refused the problem size; rerun in Monte Carlo mode.
pub const EXIT_SIZE_CAP: u8 = 4;
/// The computation hit its deadline.
pub const EXIT_TIMEOUT: u8 = 5;

#[derive(Parser)]
#[command(
    name = "plaque",
    version,
    about = "Visualize redundancies in relational data: per-cell information content under functional dependencies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Compute the entropy matrix and write heatmap, histogram, and exports
    Profile(profile::ProfileArgs),
    /// Derive Monte Carlo iteration counts from accuracy and confidence
    Plan(plan::PlanArgs),
    /// Measure engine runtimes over row and iteration grids
    Bench(bench::BenchArgs),
}

/// An error carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn input(message: impl fmt::Display) -> Self {
        CliError {
            message: message.to_string(),
            code: EXIT_INPUT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<EntropyError> for CliError {
    fn from(err: EntropyError) -> Self {
        let code = match &err {
            EntropyError::Precondition(SatisfactionError::Violated(_)) => EXIT_VIOLATION,
            EntropyError::TooManyCells { .. } | EntropyError::TooManyWitnesses { .. } => {
                EXIT_SIZE_CAP
            }
            EntropyError::Timeout => EXIT_TIMEOUT,
            _ => EXIT_INPUT,
        };
        CliError {
            message: err.to_string(),
            code,
        }
    }
}

macro_rules! input_error_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CliError {
            fn from(err: $ty) -> Self {
                CliError::input(err)
            }
        })*
    };
}

input_error_from!(
    plaque_core::IngestError,
    plaque_core::FdParseError,
    plaque_core::PlanError,
    plaque_core::ReportError,
    std::io::Error
);

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

pub(crate) fn parse_delimiter(raw: &str) -> Result<u8, CliError> {
    let bytes = raw.as_bytes();
    if bytes.len() != 1 {
        return Err(CliError::input(format!(
            "delimiter must be a single byte, got `{raw}`"
        )));
    }
    Ok(bytes[0])
}

/// Runs `f` on a dedicated worker pool when a thread count is given.
/// Results are identical either way; the knob only controls parallelism.
pub(crate) fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::input(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Dispatches a parsed invocation and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Profile(args) => profile::run(&args),
        Command::Plan(args) => plan::run(&args),
        Command::Bench(args) => bench::run(&args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {err}");
            err.code
        }
    }
}
