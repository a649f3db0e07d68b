use clap::Parser;
use std::io::Write;
use std::process::ExitCode;
use sublandau::cli::{error_line, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command_line = std::env::args().collect::<Vec<_>>().join(" ");
    match run(&cli, command_line) {
        Ok(Some(csv)) => {
            let _ = std::io::stdout().write_all(csv.as_bytes());
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::FAILURE
        }
    }
}
