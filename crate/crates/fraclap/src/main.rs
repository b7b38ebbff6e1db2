use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = fraclap::cli::Cli::parse();
    match fraclap::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.into()
        }
    }
}
