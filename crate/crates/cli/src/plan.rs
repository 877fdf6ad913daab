//! The `plan` subcommand: iteration counts from the Hoeffding bound.

use std::path::PathBuf;

use clap::Args;
use plaque_core::plan_iterations;

use crate::{write_text, CliError};

#[derive(Args, Debug)]
pub struct PlanArgs {
    /// Target accuracy
    #[arg(long)]
    pub epsilon: f64,
    /// One minus the target confidence
    #[arg(long)]
    pub delta: f64,
    /// Also emit an (epsilon, delta, iterations) grid as CSV
    #[arg(long)]
    pub sweep: bool,
    /// Where to write the sweep CSV; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const SWEEP_EPSILONS: [f64; 8] = [0.001, 0.002, 0.005, 0.01, 0.02, 0.04, 0.05, 0.1];
const SWEEP_DELTAS: [f64; 4] = [0.001, 0.01, 0.05, 0.1];

pub fn run(args: &PlanArgs) -> Result<(), CliError> {
    let plan = plan_iterations(args.epsilon, args.delta)?;
    println!("{}", plan.iterations());

    if args.sweep {
        let mut csv = String::from("epsilon,delta,iterations\n");
        for &epsilon in &SWEEP_EPSILONS {
            for &delta in &SWEEP_DELTAS {
                let n = plan_iterations(epsilon, delta)?.iterations();
                csv.push_str(&format!("{epsilon},{delta},{n}\n"));
            }
        }
        match &args.out {
            Some(path) => write_text(path, &csv)?,
            None => print!("{csv}"),
        }
    }
    Ok(())
}
