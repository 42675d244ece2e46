use std::process::ExitCode;

use clap::Parser;
use log::error;
use wearcov_cli::cli::Cli;
use wearcov_cli::error::EXIT_VALIDATION_FAILED;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (command, args) = Cli::parse().command.split();
    let result = args.load().and_then(|cfg| wearcov_cli::run(command, cfg, &args.out));
    match result {
        Ok(summary) => {
            for path in &summary.outputs {
                println!("{}", path.display());
            }
            if summary.all_passed {
                ExitCode::SUCCESS
            } else {
                error!("validation failed");
                ExitCode::from(EXIT_VALIDATION_FAILED as u8)
            }
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
