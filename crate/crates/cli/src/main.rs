use std::io;
use std::process::ExitCode;

use clap::Parser;
use valiant_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = io::stdout().lock();
    ExitCode::from(valiant_cli::run(cli, &mut stdout))
}
