//! The `profile` subcommand: end-to-end plaque test over one dataset.

use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, ValueEnum};
use plaque_core::{
    check_satisfaction, entropy_matrix_auto, entropy_matrix_exact, entropy_matrix_mc,
    export_matrix_csv, export_matrix_json, plan_iterations, render_heatmap, render_histogram,
    EngineConfig, EntropyMatrix, ExactStrategy, FdSet, HeatmapOptions, IngestOptions, Instance,
    McPlan, RunMeta,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{parse_delimiter, read_bytes, with_threads, write_text, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Exact brute-force subset enumeration per cell.
    ExactNaive,
    /// Exact witness-set inclusion-exclusion per cell.
    ExactWitness,
    /// Monte Carlo estimation per cell.
    Mc,
    /// Exact witness values where the caps permit, Monte Carlo elsewhere.
    Auto,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ExactNaive => "exact-naive",
            Mode::ExactWitness => "exact-witness",
            Mode::Mc => "mc",
            Mode::Auto => "auto",
        }
    }

    fn uses_sampling(self) -> bool {
        matches!(self, Mode::Mc | Mode::Auto)
    }
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    /// CSV data file
    #[arg(long)]
    pub data: PathBuf,
    /// Dependency file, one `A1, A2 -> B` per line, `#` comments
    #[arg(long)]
    pub fds: PathBuf,
    /// Engine selection
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    pub mode: Mode,
    /// Monte Carlo accuracy
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// One minus the Monte Carlo confidence
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// Explicit Monte Carlo iteration count; overrides the planner
    #[arg(long)]
    pub iterations: Option<u64>,
    /// Sampling seed
    #[arg(long, env = "PLAQUE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Profile only the first N data rows
    #[arg(long)]
    pub limit_rows: Option<usize>,
    /// Heatmap HTML output path
    #[arg(long)]
    pub out_html: Option<PathBuf>,
    /// Entropy matrix CSV output path
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    /// Entropy matrix JSON output path (values, methods, provenance)
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    /// Histogram CSV output path
    #[arg(long)]
    pub out_histogram: Option<PathBuf>,
    /// Run manifest JSON output path
    #[arg(long)]
    pub out_manifest: Option<PathBuf>,
    /// Histogram bin count
    #[arg(long, default_value_t = NonZeroUsize::new(10).unwrap())]
    pub bins: NonZeroUsize,
    /// Cell cap for exact subset enumeration
    #[arg(long, default_value_t = 25)]
    pub max_exact_cells: usize,
    /// Witness cap for exact inclusion-exclusion
    #[arg(long, default_value_t = 20)]
    pub max_witnesses: usize,
    /// Abort the computation after this many seconds
    #[arg(long)]
    pub timeout_secs: Option<u64>,
    /// Worker threads; defaults to one per core
    #[arg(long)]
    pub threads: Option<usize>,
    /// CSV field delimiter
    #[arg(long, default_value_t = String::from(","))]
    pub delimiter: String,
    /// First CSV record is data; attributes become col1..colN
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Serialize)]
struct FileStamp {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct OutputPaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    html: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    json: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    histogram: Option<String>,
}

/// Everything needed to reproduce the run byte for byte: input digests and
/// the full effective configuration, plus the observed wall time.
#[derive(Serialize)]
struct RunManifest {
    version: u32,
    command: &'static str,
    data: FileStamp,
    fds: FileStamp,
    mode: &'static str,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    limit_rows: Option<usize>,
    bins: usize,
    max_exact_cells: usize,
    max_witnesses: usize,
    delimiter: String,
    header: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
    wall_seconds: f64,
    outputs: OutputPaths,
}

fn hex_digest(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn stamp(path: &Path, bytes: &[u8]) -> FileStamp {
    FileStamp {
        path: path.display().to_string(),
        sha256: hex_digest(bytes),
    }
}

pub fn run(args: &ProfileArgs) -> Result<(), CliError> {
    let started = Instant::now();

    let data_bytes = read_bytes(&args.data)?;
    let fd_bytes = read_bytes(&args.fds)?;
    let fd_text = String::from_utf8(fd_bytes.clone())
        .map_err(|_| CliError::input("dependency file is not valid UTF-8"))?;

    let options = IngestOptions {
        delimiter: parse_delimiter(&args.delimiter)?,
        has_header: !args.no_header,
        limit_rows: args.limit_rows,
    };
    let instance = Instance::ingest_csv(&data_bytes[..], &options)?;
    let fds = FdSet::parse(&fd_text, instance.schema())?;

    if let Err(err) = check_satisfaction(&instance, &fds) {
        return Err(plaque_core::EntropyError::from(err).into());
    }

    let cfg = EngineConfig {
        max_naive_cells: args.max_exact_cells,
        max_witnesses: args.max_witnesses,
        deadline: args.timeout_secs.map(|s| Instant::now() + Duration::from_secs(s)),
        ..EngineConfig::default()
    };
    let plan = match args.iterations {
        Some(n) => McPlan::explicit(n)?,
        None => plan_iterations(args.epsilon, args.delta)?,
    };

    let matrix: EntropyMatrix = with_threads(args.threads, || match args.mode {
        Mode::ExactNaive => entropy_matrix_exact(&instance, &fds, ExactStrategy::Naive, &cfg),
        Mode::ExactWitness => entropy_matrix_exact(&instance, &fds, ExactStrategy::Witness, &cfg),
        Mode::Mc => entropy_matrix_mc(&instance, &fds, &plan, args.seed, &cfg),
        Mode::Auto => entropy_matrix_auto(&instance, &fds, &plan, args.seed, &cfg),
    })??;

    let meta = RunMeta {
        mode: args.mode.as_str().to_owned(),
        seed: args.seed,
        epsilon: args.mode.uses_sampling().then_some(plan.epsilon()).flatten(),
        delta: args.mode.uses_sampling().then_some(plan.delta()).flatten(),
        iterations: args.mode.uses_sampling().then_some(plan.iterations()),
        fd_digest: hex_digest(&fd_bytes),
    };

    if let Some(path) = &args.out_html {
        let title = match args.data.file_name() {
            Some(name) => format!("Plaque test: {}", name.to_string_lossy()),
            None => "Plaque test".to_owned(),
        };
        let html = render_heatmap(&instance, &matrix, &HeatmapOptions { title })?;
        write_text(path, &html)?;
    }
    if let Some(path) = &args.out_csv {
        write_text(path, &export_matrix_csv(&matrix))?;
    }
    if let Some(path) = &args.out_json {
        write_text(path, &export_matrix_json(&matrix, Some(&meta)))?;
    }
    if let Some(path) = &args.out_histogram {
        write_text(path, &render_histogram(&matrix, args.bins))?;
    }
    if let Some(path) = &args.out_manifest {
        let manifest = RunManifest {
            version: 1,
            command: "profile",
            data: stamp(&args.data, &data_bytes),
            fds: stamp(&args.fds, &fd_bytes),
            mode: args.mode.as_str(),
            seed: args.seed,
            epsilon: meta.epsilon,
            delta: meta.delta,
            iterations: meta.iterations,
            limit_rows: args.limit_rows,
            bins: args.bins.get(),
            max_exact_cells: args.max_exact_cells,
            max_witnesses: args.max_witnesses,
            delimiter: args.delimiter.clone(),
            header: !args.no_header,
            threads: args.threads,
            wall_seconds: started.elapsed().as_secs_f64(),
            outputs: OutputPaths {
                html: args.out_html.as_ref().map(|p| p.display().to_string()),
                csv: args.out_csv.as_ref().map(|p| p.display().to_string()),
                json: args.out_json.as_ref().map(|p| p.display().to_string()),
                histogram: args
                    .out_histogram
                    .as_ref()
                    .map(|p| p.display().to_string()),
            },
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::input(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        write_text(path, &text)?;
    }

    let positions = matrix.n_rows() * matrix.arity();
    let plaque_cells = matrix
        .rows()
        .flatten()
        .filter(|cell| cell.value < 1.0)
        .count();
    println!(
        "{} rows x {} attributes ({} cells), mode {}, min entropy {:.4}; {} cells test positive",
        matrix.n_rows(),
        matrix.arity(),
        positions,
        args.mode.as_str(),
        matrix.min_value(),
        plaque_cells
    );
    Ok(())
}
