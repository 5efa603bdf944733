use std::process::ExitCode;

use clap::Parser;
use experiments::cli::{execute, Cli, LOG_ENV};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aodprec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
