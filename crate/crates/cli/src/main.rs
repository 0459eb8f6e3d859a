use std::process::ExitCode;

use clap::Parser;
use hopflab_cli::args::Cli;
use hopflab_cli::commands::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(status) => ExitCode::from(status.exit_code()),
        Err(e) => {
            eprintln!("hopflab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
