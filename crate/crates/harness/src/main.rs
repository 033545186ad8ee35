use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use possal_harness::cli::{execute, Cli, Command};
use possal_harness::HarnessError;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let missing_config = matches!(&cli.command, Command::Run { config, .. } if !config.exists());
    if missing_config {
        eprintln!("error: config file not found\n");
        eprintln!("{}", Cli::command().render_usage());
        return ExitCode::from(2);
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, HarnessError::Config(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
