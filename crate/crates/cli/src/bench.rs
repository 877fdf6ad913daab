//! The `bench` subcommand: wall-clock runtimes of the engines over row and
//! iteration grids, with per-task timeouts recorded as `-`.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::Args;
use plaque_core::{
    check_satisfaction, entropy_matrix_exact, entropy_matrix_exact_unoptimized, entropy_matrix_mc,
    EngineConfig, EntropyError, EntropyMatrix, ExactStrategy, FdSet, IngestOptions, Instance,
    McPlan,
};

use crate::{parse_delimiter, read_bytes, write_text, CliError};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// CSV data file
    #[arg(long)]
    pub data: PathBuf,
    /// Dependency file
    #[arg(long)]
    pub fds: PathBuf,
    /// Comma-separated row counts, e.g. `1,2,3`; empty for none
    #[arg(long, default_value = "")]
    pub rows: String,
    /// Comma-separated Monte Carlo iteration counts; empty to skip MC
    #[arg(long, default_value = "")]
    pub iterations: String,
    /// Per-task timeout; timed-out cells are recorded as `-`
    #[arg(long, default_value_t = 60)]
    pub timeout_secs: u64,
    /// Sampling seed
    #[arg(long, env = "PLAQUE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Where to write the runtime CSV; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV field delimiter
    #[arg(long, default_value_t = String::from(","))]
    pub delimiter: String,
    /// First CSV record is data; attributes become col1..colN
    #[arg(long)]
    pub no_header: bool,
    /// Cell cap for exact subset enumeration
    #[arg(long, default_value_t = 25)]
    pub max_exact_cells: usize,
    /// Witness cap for exact inclusion-exclusion
    #[arg(long, default_value_t = 20)]
    pub max_witnesses: usize,
}

fn parse_grid<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CliError::input(format!("bad {what} entry `{s}`")))
        })
        .collect()
}

/// Times one matrix computation. A timeout or an exact-engine size cap is
/// recorded as `-`; either way the cell did not complete.
fn time_task(
    f: impl FnOnce(&EngineConfig) -> Result<EntropyMatrix, EntropyError>,
    timeout: Duration,
    cfg: &EngineConfig,
) -> Result<String, CliError> {
    let cfg = EngineConfig {
        deadline: Some(Instant::now() + timeout),
        ..*cfg
    };
    let started = Instant::now();
    match f(&cfg) {
        Ok(_) => Ok(format!("{:.3}", started.elapsed().as_secs_f64())),
        Err(EntropyError::Timeout) => Ok("-".to_owned()),
        Err(EntropyError::TooManyCells { .. }) | Err(EntropyError::TooManyWitnesses { .. }) => {
            Ok("-".to_owned())
        }
        Err(other) => Err(other.into()),
    }
}

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    let row_grid: Vec<usize> = parse_grid(&args.rows, "row count")?;
    let iteration_grid: Vec<u64> = parse_grid(&args.iterations, "iteration count")?;
    let timeout = Duration::from_secs(args.timeout_secs);

    let data_bytes = read_bytes(&args.data)?;
    let fd_text = String::from_utf8(read_bytes(&args.fds)?)
        .map_err(|_| CliError::input("dependency file is not valid UTF-8"))?;
    let delimiter = parse_delimiter(&args.delimiter)?;
    let base_cfg = EngineConfig {
        max_naive_cells: args.max_exact_cells,
        max_witnesses: args.max_witnesses,
        ..EngineConfig::default()
    };

    let mut csv = String::from("mode,rows,iterations,seconds\n");
    for &rows in &row_grid {
        let options = IngestOptions {
            delimiter,
            has_header: !args.no_header,
            limit_rows: Some(rows),
        };
        let instance = Instance::ingest_csv(&data_bytes[..], &options)?;
        let fds = FdSet::parse(&fd_text, instance.schema())?;
        if let Err(err) = check_satisfaction(&instance, &fds) {
            return Err(EntropyError::from(err).into());
        }

        let unoptimized = time_task(
            |cfg| entropy_matrix_exact_unoptimized(&instance, &fds, cfg),
            timeout,
            &base_cfg,
        )?;
        csv.push_str(&format!("exact-unoptimized,{rows},,{unoptimized}\n"));

        let optimized = time_task(
            |cfg| entropy_matrix_exact(&instance, &fds, ExactStrategy::Witness, cfg),
            timeout,
            &base_cfg,
        )?;
        csv.push_str(&format!("exact-optimized,{rows},,{optimized}\n"));

        for &iterations in &iteration_grid {
            let plan = McPlan::explicit(iterations)?;
            let seconds = time_task(
                |cfg| entropy_matrix_mc(&instance, &fds, &plan, args.seed, cfg),
                timeout,
                &base_cfg,
            )?;
            csv.push_str(&format!("mc,{rows},{iterations},{seconds}\n"));
        }
    }

    match &args.out {
        Some(path) => write_text(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
