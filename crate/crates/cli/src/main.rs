//! `railgen`: track detection and anomaly injection from the command line.

mod args;
mod commands;
mod debug;
mod failure;
mod log;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use failure::Failure;

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(std::env::args_os()) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go to stdout, everything else is a usage error
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(Failure::USAGE),
            };
        }
    };
    let result = match &cli.command {
        Command::Detect(a) => commands::detect(a),
        Command::SimulateVegetation(a) => commands::simulate_vegetation(a),
        Command::SimulateKink(a) => commands::simulate_kink(a),
        Command::BuildDataset(a) => commands::build_dataset(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            log::error(&[("event", "failed"), ("kind", f.kind()), ("message", f.message())]);
            ExitCode::from(f.code())
        }
    }
}
