use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = evomlp_cli::Cli::parse();
    ExitCode::from(evomlp_cli::run(cli))
}
