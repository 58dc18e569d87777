//! Phase 2: feeding tile distances into per-row neighbor heaps.
//!
//! Each worker scans a strided share of a row and compares every distance with
//! a snapshot of the heap root. Only candidates that beat the snapshot are
//! copied into the worker's private buffer; the buffer is flushed into the heap
//! under the heap's lock when it fills and at the end of the row. With
//! `k << n` almost everything is rejected by the snapshot, so locking is rare.
//!
//! The row side of a tile feeds `h_y` with index `x`; the mirror side (the
//! transposed tile) feeds `h_x` with index `y`, so each computed pair reaches
//! both of its heaps.

use std::ops::{AddAssign, DerefMut};
use std::sync::Mutex;
use std::thread;

use crate::error::{KnnError, Result};
use crate::heap::{Neighbor, NeighborHeap};
use crate::kernel::DistanceTile;

pub const DEFAULT_BUF_SIZE: usize = 16;
pub const DEFAULT_WORKERS: usize = 1;

/// Indices `worker_id, worker_id + workers, ...` below `row_length`.
pub fn strided_partition(row_length: usize, workers: usize, worker_id: usize) -> impl Iterator<Item = usize> {
    assert!(worker_id < workers, "worker {worker_id} out of range for {workers} workers");
    (worker_id..row_length).step_by(workers)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectConfig {
    pub buf_size: usize,
    pub workers: usize,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            buf_size: DEFAULT_BUF_SIZE,
            workers: DEFAULT_WORKERS,
        }
    }
}

impl SelectConfig {
    pub fn new(buf_size: usize, workers: usize) -> Result<Self> {
        if buf_size == 0 {
            return Err(KnnError::config("buffer size must be at least 1"));
        }
        if workers == 0 {
            return Err(KnnError::config("workers per lane must be at least 1"));
        }
        Ok(Self { buf_size, workers })
    }
}

/// One lane's heaps, one per vector.
#[derive(Debug)]
pub struct HeapStore {
    heaps: Vec<Mutex<NeighborHeap>>,
}

impl HeapStore {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            heaps: (0..n).map(|_| Mutex::new(NeighborHeap::new(k))).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.heaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heaps.is_empty()
    }

    pub fn get_mut(&mut self, i: usize) -> &mut NeighborHeap {
        self.heaps[i].get_mut().unwrap_or_else(|e| e.into_inner())
    }

    pub fn into_heaps(self) -> Vec<NeighborHeap> {
        self.heaps
            .into_iter()
            .map(|m| m.into_inner().unwrap_or_else(|e| e.into_inner()))
            .collect()
    }
}

/// Counters describing how much work the root filter saved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PushStats {
    /// Distances examined.
    pub scanned: u64,
    /// Distances that passed the root filter into a private buffer.
    pub buffered: u64,
    /// Buffered candidates the heap kept.
    pub kept: u64,
    /// Buffer flushes, each one lock acquisition.
    pub flushes: u64,
}

impl AddAssign for PushStats {
    fn add_assign(&mut self, o: Self) {
        self.scanned += o.scanned;
        self.buffered += o.buffered;
        self.kept += o.kept;
        self.flushes += o.flushes;
    }
}

/// Snapshot of a heap's acceptance threshold.
#[derive(Debug, Clone, Copy)]
enum Gate {
    Open,
    Below(Neighbor),
    Closed,
}

impl Gate {
    fn of(heap: &NeighborHeap) -> Self {
        if heap.capacity() == 0 {
            Gate::Closed
        } else if !heap.is_full() {
            Gate::Open
        } else {
            Gate::Below(*heap.root().expect("full heap has a root"))
        }
    }

    #[inline]
    fn passes(&self, c: &Neighbor) -> bool {
        match self {
            Gate::Open => true,
            Gate::Below(root) => c < root,
            Gate::Closed => false,
        }
    }
}

/// Exclusive access to one heap: either a plain borrow or a lock.
trait HeapSlot {
    fn with<R>(&mut self, f: impl FnOnce(&mut NeighborHeap) -> R) -> R;
}

impl HeapSlot for &mut NeighborHeap {
    fn with<R>(&mut self, f: impl FnOnce(&mut NeighborHeap) -> R) -> R {
        f(self)
    }
}

impl HeapSlot for &Mutex<NeighborHeap> {
    fn with<R>(&mut self, f: impl FnOnce(&mut NeighborHeap) -> R) -> R {
        let mut guard = self.lock().unwrap_or_else(|e| e.into_inner());
        f(guard.deref_mut())
    }
}

/// Pushes buffered candidates, re-checking each against the current root.
fn flush(heap: &mut NeighborHeap, buf: &mut Vec<Neighbor>, stats: &mut PushStats) -> Gate {
    stats.flushes += 1;
    for c in buf.drain(..) {
        if heap.push(c) {
            stats.kept += 1;
        }
    }
    Gate::of(heap)
}

/// One worker's share of one row.
fn scan_share(
    values: &[crate::metric::Distance],
    first_col: usize,
    positions: impl Iterator<Item = usize>,
    mut slot: impl HeapSlot,
    buf: &mut Vec<Neighbor>,
    buf_size: usize,
    stats: &mut PushStats,
) {
    let mut gate = slot.with(|h| Gate::of(h));
    if matches!(gate, Gate::Closed) {
        return;
    }
    for pos in positions {
        stats.scanned += 1;
        let candidate = Neighbor::new(values[pos], (first_col + pos) as u32);
        if gate.passes(&candidate) {
            buf.push(candidate);
            stats.buffered += 1;
            if buf.len() >= buf_size {
                gate = slot.with(|h| flush(h, buf, stats));
            }
        }
    }
    if !buf.is_empty() {
        slot.with(|h| flush(h, buf, stats));
    }
}

/// Offers every set entry `(row, col)` of `tile` to heap `row` as `(distance, col)`.
pub fn push_rows(tile: &DistanceTile, heaps: &mut HeapStore, cfg: &SelectConfig) -> PushStats {
    let mut stats = PushStats::default();
    if cfg.workers <= 1 {
        let mut buf = Vec::with_capacity(cfg.buf_size);
        for row in tile.rows() {
            let values = tile.row_values(row);
            let first_col = tile.valid_cols(row).start;
            scan_share(
                values,
                first_col,
                0..values.len(),
                heaps.get_mut(row),
                &mut buf,
                cfg.buf_size,
                &mut stats,
            );
        }
        return stats;
    }

    let shared: &HeapStore = heaps;
    thread::scope(|s| {
        let handles: Vec<_> = (0..cfg.workers)
            .map(|worker| {
                s.spawn(move || {
                    let mut stats = PushStats::default();
                    let mut buf = Vec::with_capacity(cfg.buf_size);
                    for row in tile.rows() {
                        let values = tile.row_values(row);
                        let first_col = tile.valid_cols(row).start;
                        scan_share(
                            values,
                            first_col,
                            strided_partition(values.len(), cfg.workers, worker),
                            &shared.heaps[row],
                            &mut buf,
                            cfg.buf_size,
                            &mut stats,
                        );
                    }
                    stats
                })
            })
            .collect();
        for h in handles {
            stats += h.join().expect("select worker panicked");
        }
    });
    stats
}

/// Runs the row-side push and the mirror push for one tile, reusing a
/// transpose buffer across calls.
#[derive(Debug, Default)]
pub struct Selector {
    cfg: SelectConfig,
    mirror: DistanceTile,
}

impl Selector {
    pub fn new(cfg: SelectConfig) -> Self {
        Self {
            cfg,
            mirror: DistanceTile::default(),
        }
    }

    pub fn config(&self) -> &SelectConfig {
        &self.cfg
    }

    pub fn k_smallest_push(&mut self, tile: &DistanceTile, heaps: &mut HeapStore) -> PushStats {
        let mut stats = push_rows(tile, heaps, &self.cfg);
        tile.transpose_into(&mut self.mirror);
        stats += push_rows(&self.mirror, heaps, &self.cfg);
        stats
    }
}

/// Free-function form of [`Selector::k_smallest_push`].
pub fn k_smallest_push(tile: &DistanceTile, heaps: &mut HeapStore, buf_size: usize, workers: usize) -> Result<PushStats> {
    let cfg = SelectConfig::new(buf_size, workers)?;
    Ok(Selector::new(cfg).k_smallest_push(tile, heaps))
}
