use std::process::ExitCode;

use clap::Parser;
use urbent::commands;
use urbent::config::{Cli, Command};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("URBENT_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Mine(args) => commands::mine(args),
        Command::Synth(args) => commands::synth(args),
        Command::Validate(args) => commands::validate(args, &mut std::io::stdout().lock()),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("urbent: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
