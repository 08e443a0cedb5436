use std::process::ExitCode;

use bdris::cli::{run, CommandSpec};
use clap::Parser;

fn main() -> ExitCode {
    let cmd = CommandSpec::parse();
    let level = match cmd.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cmd) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
