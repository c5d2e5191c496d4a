use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = cage_cli::Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match cage_cli::run(cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
