use std::process::ExitCode;

use clap::Parser;
use kmmeans_cli::args::Cli;
use kmmeans_cli::commands::run;

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(done) => ExitCode::from(done.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
