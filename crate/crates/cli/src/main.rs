use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = plaque_cli::Cli::parse();
    ExitCode::from(plaque_cli::run(cli))
}
