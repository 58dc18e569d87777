use std::fs;
use std::io::Write;
use std::path::Path;

use tileknn::format::{load_dataset, render_neighbors, write_dataset};
use tileknn::generate::generate_uniform;
use tileknn::{brute_force_named, engine, first_mismatch, Dataset, KnnError, Result};

use crate::bench;
use crate::config::{Command, DataSource, RunConfig};

#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

pub fn execute(cfg: &RunConfig, out: &mut impl Write) -> Result<Outcome> {
    match &cfg.command {
        Command::Run { input, output, format } => {
            let ds = load_dataset(input)?;
            let result = engine::run_named(&ds, cfg.distance, &cfg.engine)?;
            let bytes = render_neighbors(&result.lists, *format)?;
            write_file(output, &bytes)?;
            Ok(Outcome::Success)
        }
        Command::Verify { input } => {
            let ds = load_dataset(input)?;
            let actual = engine::run_named(&ds, cfg.distance, &cfg.engine)?;
            let expected = brute_force_named(&ds, cfg.distance, cfg.engine.k)?;
            let pairs = (ds.n() * (ds.n() - 1) / 2) as u64;
            if let Some(m) = first_mismatch(&expected.lists, &actual.lists) {
                writeln!(out, "verify FAILED: {m}")?;
                return Ok(Outcome::VerificationFailed);
            }
            if actual.evaluations != pairs {
                writeln!(
                    out,
                    "verify FAILED: engine evaluated {} pairs, expected {pairs}",
                    actual.evaluations
                )?;
                return Ok(Outcome::VerificationFailed);
            }
            writeln!(
                out,
                "verify ok: {} rows, k = {}, {} lanes, {pairs} pair distances",
                ds.n(),
                cfg.engine.k,
                cfg.engine.n_lanes
            )?;
            Ok(Outcome::Success)
        }
        Command::Generate { output, n, d } => {
            let ds = generate_uniform(*n, *d, cfg.seed)?;
            let mut bytes = Vec::with_capacity(16 + n * d * 4);
            write_dataset(&mut bytes, &ds)?;
            write_file(output, &bytes)?;
            Ok(Outcome::Success)
        }
        Command::Bench {
            source,
            lane_counts,
            with_oracle,
        } => {
            let ds = load_source(source)?;
            let report = bench::bench(&ds, cfg.distance, &cfg.engine, lane_counts, *with_oracle)?;
            out.write_all(report.render().as_bytes())?;
            Ok(Outcome::Success)
        }
    }
}

fn load_source(source: &DataSource) -> Result<Dataset> {
    match source {
        DataSource::File(path) => load_dataset(path),
        DataSource::Generated { n, d, seed } => generate_uniform(*n, *d, *seed),
    }
}

/// Writes the whole file or nothing: a partial file is removed on failure.
fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Err(e) = fs::write(path, bytes) {
        let _ = fs::remove_file(path);
        return Err(KnnError::Io(e));
    }
    Ok(())
}
