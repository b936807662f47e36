use clap::Parser;
use deptsim::harness::cli::{execute, Cli};

fn main() -> std::process::ExitCode {
    match execute(Cli::parse(), &mut std::io::stdout()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
