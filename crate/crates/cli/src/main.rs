use std::process::ExitCode;

use clap::Parser;
use hamgen_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command, &mut std::io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hamgen: error: {e}");
            ExitCode::FAILURE
        }
    }
}
