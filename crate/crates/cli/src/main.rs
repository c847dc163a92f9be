//! `hyplevel`: trace level curves of holomorphic self-maps of the unit disc,
//! evaluate their curvature and check the curvature, area and perimeter
//! inequalities.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::{run, Status};

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("HYPLEVEL_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("HYPLEVEL_THREADS must be a positive integer, got {v:?}")),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match threads_from_env() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
        Ok(None) => {}
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    }
    match run(&cli.command) {
        Ok(Status::Clean) => ExitCode::SUCCESS,
        Ok(Status::Violation) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
