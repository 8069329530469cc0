use std::process::ExitCode;

use clap::Parser;
use mtcsync_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mtcsync: {e}");
            e.exit_code()
        }
    }
}
