use std::process::ExitCode;

use clap::Parser;
use tdho::commands::{run, Cli};

const EXIT_ERROR: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            log::error!("{} failed its verification threshold", cli.command.name());
            ExitCode::from(EXIT_VERIFICATION)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
