//! Lane-scaling timing table.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use tileknn::{brute_force_named, engine, Dataset, DistanceKind, EngineConfig, KnnOutput, Result};

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub distance: DistanceKind,
    /// (lane count, seconds), in the order requested.
    pub engine: Vec<(usize, f64)>,
    /// Single-threaded brute-force seconds, when measured.
    pub oracle: Option<f64>,
}

fn lanes_label(lanes: usize) -> String {
    if lanes == 1 {
        "1 lane".to_string()
    } else {
        format!("{lanes} lanes")
    }
}

impl BenchReport {
    /// Speedup rows: oracle over every engine row (most lanes first), then
    /// the first requested lane count over each of the others.
    pub fn ratios(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        let mut by_lanes_desc = self.engine.clone();
        by_lanes_desc.sort_by(|a, b| b.0.cmp(&a.0));
        if let Some(oracle) = self.oracle {
            for &(lanes, secs) in &by_lanes_desc {
                out.push((format!("oracle / {}", lanes_label(lanes)), oracle / secs));
            }
        }
        if let Some(&(base_lanes, base_secs)) = self.engine.first() {
            for &(lanes, secs) in self.engine.iter().skip(1) {
                out.push((
                    format!("{} / {}", lanes_label(base_lanes), lanes_label(lanes)),
                    base_secs / secs,
                ));
            }
        }
        out
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "n = {}, d = {}, k = {}, distance = {} (seconds: pack + compute + merge, file I/O excluded)",
            self.n, self.d, self.k, self.distance
        );
        let _ = writeln!(s, "{:<24}{:>12}", "configuration", "seconds");
        for &(lanes, secs) in &self.engine {
            let _ = writeln!(s, "{:<24}{:>12.3}", lanes_label(lanes), secs);
        }
        if let Some(secs) = self.oracle {
            let _ = writeln!(s, "{:<24}{:>12.3}", "oracle (1 thread)", secs);
        }
        let ratios = self.ratios();
        if !ratios.is_empty() {
            let _ = writeln!(s, "{:<24}{:>12}", "ratio", "value");
            for (label, value) in ratios {
                let _ = writeln!(s, "{label:<24}{value:>12.2}");
            }
        }
        s
    }
}

pub fn time_engine(ds: &Dataset, kind: DistanceKind, cfg: &EngineConfig) -> Result<(Duration, KnnOutput)> {
    let start = Instant::now();
    let out = engine::run_named(ds, kind, cfg)?;
    Ok((start.elapsed(), out))
}

/// Times the engine at each lane count (one untimed warm-up run each) and,
/// optionally, the brute-force baseline.
pub fn bench(
    ds: &Dataset,
    kind: DistanceKind,
    base: &EngineConfig,
    lane_counts: &[usize],
    with_oracle: bool,
) -> Result<BenchReport> {
    let mut engine = Vec::with_capacity(lane_counts.len());
    for &lanes in lane_counts {
        let cfg = EngineConfig { n_lanes: lanes, ..*base };
        time_engine(ds, kind, &cfg)?;
        let (elapsed, _) = time_engine(ds, kind, &cfg)?;
        engine.push((lanes, elapsed.as_secs_f64()));
    }
    let oracle = if with_oracle {
        let start = Instant::now();
        brute_force_named(ds, kind, base.k)?;
        Some(start.elapsed().as_secs_f64())
    } else {
        None
    };
    Ok(BenchReport {
        n: ds.n(),
        d: ds.d(),
        k: base.k,
        distance: kind,
        engine,
        oracle,
    })
}
