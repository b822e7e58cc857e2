mod args;
mod commands;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    let report = commands::run(&cli.global, &cli.command, &mut io::stdin().lock());
    let _ = io::stdout().write_all(report.stdout.as_bytes());
    let _ = io::stderr().write_all(report.stderr.as_bytes());
    ExitCode::from(report.outcome as u8)
}
