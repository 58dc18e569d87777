use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use tileknn::format::OutputFormat;
use tileknn::schedule::PlanParams;
use tileknn::{DistanceKind, EngineConfig, KnnError, Result, SelectConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Run,
    Verify,
    Bench,
    Generate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    Hellinger,
    Sqeuclidean,
}

impl From<DistanceArg> for DistanceKind {
    fn from(d: DistanceArg) -> Self {
        match d {
            DistanceArg::Hellinger => DistanceKind::Hellinger,
            DistanceArg::Sqeuclidean => DistanceKind::SqEuclidean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Binary,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Binary => OutputFormat::Binary,
        }
    }
}

/// Exact k-nearest neighbors over a dense vector file.
///
/// Exit codes: 0 success, 1 verification failure, 2 configuration error,
/// 3 I/O or format error.
#[derive(Debug, Parser)]
#[command(name = "tileknn", version)]
pub struct Args {
    #[arg(long, value_enum, default_value = "run")]
    pub mode: Mode,

    /// Dataset file (KNNV format).
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Neighbor file for run mode, dataset file for generate mode.
    #[arg(long)]
    pub output: Option<PathBuf>,

    #[arg(long, default_value_t = 100)]
    pub k: usize,

    /// Worker lanes. Each lane holds n heaps of k entries, so heap memory
    /// grows as n·k·lanes (about 16 MB per lane at n = 20000, k = 100).
    #[arg(long, default_value_t = 1)]
    pub lanes: usize,

    /// Grid side; defaults to min(4096, n rounded up to a multiple of bsize).
    #[arg(long)]
    pub gsize: Option<usize>,

    /// Rows per block [default: 64].
    #[arg(long)]
    pub bsize: Option<usize>,

    /// Column vectors staged per pass [default: 32].
    #[arg(long)]
    pub c1: Option<usize>,

    /// Coordinates staged per pass [default: 32].
    #[arg(long)]
    pub c2: Option<usize>,

    /// Private candidate buffer per selection worker.
    #[arg(long, default_value_t = tileknn::select::DEFAULT_BUF_SIZE)]
    pub bufsize: usize,

    /// Selection workers per lane.
    #[arg(long, default_value_t = tileknn::select::DEFAULT_WORKERS)]
    pub workers: usize,

    #[arg(long, value_enum, default_value = "hellinger")]
    pub distance: DistanceArg,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Vector count for generate mode (and bench without --input).
    #[arg(long)]
    pub n: Option<usize>,

    /// Dimension for generate mode (and bench without --input).
    #[arg(long)]
    pub d: Option<usize>,

    /// Comma-separated lane counts for bench mode.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub lane_counts: Vec<usize>,

    /// Output encoding for run mode.
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatArg,

    /// Leave the single-threaded brute-force baseline out of bench mode.
    #[arg(long)]
    pub skip_oracle: bool,
}

/// Where bench mode gets its data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataSource {
    File(PathBuf),
    Generated { n: usize, d: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub enum Command {
    Run { input: PathBuf, output: PathBuf, format: OutputFormat },
    Verify { input: PathBuf },
    Generate { output: PathBuf, n: usize, d: usize },
    Bench { source: DataSource, lane_counts: Vec<usize>, with_oracle: bool },
}

/// Validated settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub engine: EngineConfig,
    pub distance: DistanceKind,
    pub seed: u64,
}

fn require<T>(value: Option<T>, flag: &str, mode: &str) -> Result<T> {
    value.ok_or_else(|| KnnError::Config(format!("{mode} mode needs {flag}")))
}

impl RunConfig {
    pub fn from_args(args: Args) -> Result<Self> {
        if args.k == 0 {
            return Err(KnnError::Config("--k must be at least 1".into()));
        }
        if args.lanes == 0 {
            return Err(KnnError::Config("--lanes must be at least 1".into()));
        }
        let plan = PlanParams {
            gsize: args.gsize,
            bsize: args.bsize,
            c1: args.c1,
            c2: args.c2,
        };
        // Catch bad tiling before any file is touched.
        plan.resolve(2, args.lanes)?;
        let engine = EngineConfig {
            k: args.k,
            n_lanes: args.lanes,
            plan,
            select: SelectConfig::new(args.bufsize, args.workers)?,
        };

        let command = match args.mode {
            Mode::Run => Command::Run {
                input: require(args.input, "--input", "run")?,
                output: require(args.output, "--output", "run")?,
                format: args.format.into(),
            },
            Mode::Verify => Command::Verify {
                input: require(args.input, "--input", "verify")?,
            },
            Mode::Generate => {
                let n = require(args.n, "--n", "generate")?;
                let d = require(args.d, "--d", "generate")?;
                check_shape(n, d)?;
                Command::Generate {
                    output: require(args.output, "--output", "generate")?,
                    n,
                    d,
                }
            }
            Mode::Bench => {
                if args.lane_counts.is_empty() || args.lane_counts.contains(&0) {
                    return Err(KnnError::Config("--lane-counts needs positive entries".into()));
                }
                let source = match (args.input, args.n, args.d) {
                    (Some(path), _, _) => DataSource::File(path),
                    (None, Some(n), Some(d)) => {
                        check_shape(n, d)?;
                        DataSource::Generated { n, d, seed: args.seed }
                    }
                    _ => return Err(KnnError::Config("bench mode needs --input or both --n and --d".into())),
                };
                Command::Bench {
                    source,
                    lane_counts: args.lane_counts,
                    with_oracle: !args.skip_oracle,
                }
            }
        };

        Ok(Self {
            command,
            engine,
            distance: args.distance.into(),
            seed: args.seed,
        })
    }
}

fn check_shape(n: usize, d: usize) -> Result<()> {
    if n < 2 || d == 0 || u32::try_from(n).is_err() || u32::try_from(d).is_err() {
        return Err(KnnError::Config(format!("need n >= 2 and d >= 1 within u32, got n = {n}, d = {d}")));
    }
    Ok(())
}
