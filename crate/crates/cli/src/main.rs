mod bench;
mod commands;
mod config;

use std::io;
use std::process::ExitCode;

use clap::Parser;
use tileknn::KnnError;

use crate::commands::{execute, Outcome};
use crate::config::{Args, RunConfig};

const EXIT_VERIFY: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

fn exit_code(err: &KnnError) -> u8 {
    match err {
        KnnError::Config(_) | KnnError::UnknownDistance(_) | KnnError::Asymmetric(_) => EXIT_CONFIG,
        KnnError::Io(_)
        | KnnError::Format(_)
        | KnnError::Dataset(_)
        | KnnError::Domain { .. }
        | KnnError::DimensionMismatch { .. }
        | KnnError::NonFiniteDistance { .. } => EXIT_IO,
        // Lanes disagreeing with the schedule means the results are wrong.
        KnnError::DuplicateNeighbor { .. } => EXIT_VERIFY,
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let args = Args::parse();
    let result = RunConfig::from_args(args).and_then(|cfg| execute(&cfg, &mut io::stdout().lock()));
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(EXIT_VERIFY),
        Err(e) => {
            eprintln!("tileknn: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
