mod args;
mod commands;
mod inputs;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;
use qpe_core::QpeError;

use crate::args::{merged_args, Cli, Command};

/// Marks an error as caused by user input (exit code 2).
#[derive(Debug)]
pub struct InputError;

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid input")
    }
}

impl std::error::Error for InputError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<InputError>().is_some() || err.downcast_ref::<QpeError>().is_some() {
        2
    } else {
        1
    }
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse_from(merged_args(std::env::args_os().collect())?);
    let args = cli.command.args();
    match cli.command {
        Command::Plan(_) => commands::plan(args),
        Command::Distribution(_) => commands::distribution(args),
        Command::Sweep(_) => commands::sweep(args),
        Command::Shots(_) => commands::shots(args),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
