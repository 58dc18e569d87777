//! Brute-force reference: every pair `x > y` on one thread, pushed to both heaps.
//!
//! This is the trusted baseline for verification and the single-core timing
//! row of the benchmark. It shares the heap order and the coordinate fold
//! order with the engine, so both produce identical bits when correct.

use crate::dataset::Dataset;
use crate::engine::KnnOutput;
use crate::error::{KnnError, Result};
use crate::heap::{Neighbor, NeighborHeap, NeighborList};
use crate::metric::{check_domain, distance_unchecked, hellinger, squared_euclidean, CumulativeDistance, DistanceKind, Symmetric};

pub fn brute_force_knn<M: CumulativeDistance>(ds: &Dataset, metric: &Symmetric<M>, k: usize) -> Result<KnnOutput> {
    if k == 0 {
        return Err(KnnError::config("k must be at least 1"));
    }
    let f = metric.inner();
    for v in ds.vectors() {
        check_domain(f, v)?;
    }
    let n = ds.n();
    let mut heaps: Vec<NeighborHeap> = (0..n).map(|_| NeighborHeap::new(k.min(n - 1))).collect();
    let mut evaluations = 0u64;
    for x in 1..n {
        let vx = ds.vector(x).coords;
        for y in 0..x {
            let dist = distance_unchecked(f, vx, ds.vector(y).coords);
            if !dist.is_finite() {
                return Err(KnnError::NonFiniteDistance {
                    metric: f.name().to_string(),
                    x,
                    y,
                });
            }
            evaluations += 1;
            heaps[x].push(Neighbor::new(dist, y as u32));
            heaps[y].push(Neighbor::new(dist, x as u32));
        }
    }
    let lists = heaps
        .into_iter()
        .enumerate()
        .map(|(i, h)| NeighborList::new(i, h.into_sorted_vec()))
        .collect();
    Ok(KnnOutput { lists, evaluations })
}

pub fn brute_force_named(ds: &Dataset, kind: DistanceKind, k: usize) -> Result<KnnOutput> {
    match kind {
        DistanceKind::Hellinger => brute_force_knn(ds, &Symmetric::new(hellinger())?, k),
        DistanceKind::SqEuclidean => brute_force_knn(ds, &Symmetric::new(squared_euclidean())?, k),
    }
}

/// First disagreement between an expected and an actual set of lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub row: usize,
    pub rank: usize,
    pub expected: Option<Neighbor>,
    pub actual: Option<Neighbor>,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let show = |nb: &Option<Neighbor>| match nb {
            Some(nb) => format!("{}:{}", nb.index, crate::format::format_sig9(nb.distance as f64)),
            None => "<none>".to_string(),
        };
        write!(
            f,
            "row {} rank {}: expected {}, actual {}",
            self.row,
            self.rank,
            show(&self.expected),
            show(&self.actual)
        )
    }
}

/// Compares lists row by row and rank by rank; distances must match bit for bit.
pub fn first_mismatch(expected: &[NeighborList], actual: &[NeighborList]) -> Option<Mismatch> {
    let rows = expected.len().max(actual.len());
    for row in 0..rows {
        let e = expected.get(row).map_or(&[][..], |l| &l.neighbors[..]);
        let a = actual.get(row).map_or(&[][..], |l| &l.neighbors[..]);
        for rank in 0..e.len().max(a.len()) {
            let (en, an) = (e.get(rank), a.get(rank));
            let same = match (en, an) {
                (Some(x), Some(y)) => x.index == y.index && x.distance.to_bits() == y.distance.to_bits(),
                _ => false,
            };
            if !same {
                return Some(Mismatch {
                    row,
                    rank,
                    expected: en.copied(),
                    actual: an.copied(),
                });
            }
        }
    }
    None
}
