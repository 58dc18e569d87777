//! The driver: one share-nothing lane per thread, a join, then the merge.

use std::thread;

use crate::dataset::Dataset;
use crate::error::{KnnError, Result};
use crate::heap::NeighborList;
use crate::kernel::{calc_distances_into, DistanceTile, EvalCounter, KernelScratch, PackedDataset};
use crate::merge::merge_all;
use crate::metric::{hellinger, squared_euclidean, CumulativeDistance, DistanceKind, Symmetric};
use crate::schedule::{GridPlan, PlanParams};
use crate::select::{HeapStore, SelectConfig, Selector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub k: usize,
    pub n_lanes: usize,
    pub plan: PlanParams,
    pub select: SelectConfig,
}

impl EngineConfig {
    pub fn new(k: usize, n_lanes: usize) -> Self {
        Self {
            k,
            n_lanes,
            plan: PlanParams::default(),
            select: SelectConfig::default(),
        }
    }
}

/// Neighbor lists for rows `0..n` plus the number of pair distances computed.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnOutput {
    pub lists: Vec<NeighborList>,
    pub evaluations: u64,
}

/// What one lane hands back at the join.
struct LaneResult {
    heaps: HeapStore,
    evaluations: EvalCounter,
}

fn run_lane<M: CumulativeDistance>(
    lane: usize,
    packed: &PackedDataset,
    metric: &Symmetric<M>,
    plan: &GridPlan,
    k: usize,
    select: SelectConfig,
) -> Result<LaneResult> {
    let mut heaps = HeapStore::new(plan.n, k);
    let mut tile = DistanceTile::default();
    let mut scratch = KernelScratch::new(plan);
    let mut selector = Selector::new(select);
    let mut evaluations = EvalCounter::default();
    for item in plan.work_items_for_lane(lane) {
        calc_distances_into(packed, metric, &item, plan, &mut tile, &mut scratch, &mut evaluations)?;
        selector.k_smallest_push(&tile, &mut heaps);
    }
    Ok(LaneResult { heaps, evaluations })
}

/// Exact k-nearest neighbors of every vector in `ds`.
pub fn run<M: CumulativeDistance>(ds: &Dataset, metric: &Symmetric<M>, cfg: &EngineConfig) -> Result<KnnOutput> {
    if cfg.k == 0 {
        return Err(KnnError::config("k must be at least 1"));
    }
    let plan = cfg.plan.resolve(ds.n(), cfg.n_lanes)?;
    let packed = PackedDataset::new(ds, metric, plan.c2)?;
    let k = cfg.k.min(ds.n() - 1);

    let results: Vec<Result<LaneResult>> = if plan.n_lanes == 1 {
        vec![run_lane(0, &packed, metric, &plan, k, cfg.select)]
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = (0..plan.n_lanes)
                .map(|lane| {
                    let (packed, plan) = (&packed, &plan);
                    s.spawn(move || run_lane(lane, packed, metric, plan, k, cfg.select))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("lane panicked"))
                .collect()
        })
    };

    let mut stores = Vec::with_capacity(results.len());
    let mut evaluations = EvalCounter::default();
    for r in results {
        let r = r?;
        evaluations.add(r.evaluations.get());
        stores.push(r.heaps);
    }
    let lists = merge_all(stores, ds.n(), k)?;
    Ok(KnnOutput {
        lists,
        evaluations: evaluations.get(),
    })
}

/// [`run`] with the distance function chosen by name.
pub fn run_named(ds: &Dataset, kind: DistanceKind, cfg: &EngineConfig) -> Result<KnnOutput> {
    match kind {
        DistanceKind::Hellinger => run(ds, &Symmetric::new(hellinger())?, cfg),
        DistanceKind::SqEuclidean => run(ds, &Symmetric::new(squared_euclidean())?, cfg),
    }
}
