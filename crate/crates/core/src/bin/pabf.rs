use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = pabf::cli::Cli::parse();
    match pabf::cli::execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
