//! Phase 1: distances for one scheduled grid.
//!
//! The tile is walked in blocks of `bsize` rows. For each block, column
//! vectors are staged `c1` at a time, and the coordinates of both sides are
//! staged `c2` at a time into small contiguous scratch buffers before the
//! `bsize x c1` partial sums are advanced. Chunking changes only which memory
//! is touched when; each pair still folds coordinates `0..d` in order, so the
//! tile is bit-identical to the scalar [`distance`](crate::metric::distance).

use std::ops::Range;

use crate::dataset::Dataset;
use crate::error::{KnnError, Result};
use crate::metric::{check_domain, CumulativeDistance, Distance, Symmetric};
use crate::schedule::{GridPlan, WorkItem};

/// Prepared coordinates, regrouped so that each `c2`-wide coordinate chunk of
/// a vector is contiguous and chunks of consecutive vectors are adjacent.
#[derive(Debug, Clone)]
pub struct PackedDataset {
    n: usize,
    d: usize,
    c2: usize,
    data: Vec<f32>,
}

impl PackedDataset {
    /// Validates `ds` against the metric's domain and applies its per-coordinate
    /// transform.
    pub fn new<M: CumulativeDistance>(ds: &Dataset, metric: &Symmetric<M>, c2: usize) -> Result<Self> {
        if c2 == 0 {
            return Err(KnnError::config("c2 must be at least 1"));
        }
        let f = metric.inner();
        for v in ds.vectors() {
            check_domain(f, v)?;
        }
        let (n, d) = (ds.n(), ds.d());
        let mut data = Vec::with_capacity(n * d);
        for chunk in chunks(d, c2) {
            for v in ds.vectors() {
                data.extend(v.coords[chunk.clone()].iter().map(|&x| f.prepare(x)));
            }
        }
        Ok(Self { n, d, c2, data })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn c2(&self) -> usize {
        self.c2
    }

    /// Coordinates `chunk` of vector `i`, already prepared.
    #[inline]
    fn slice(&self, chunk: &Range<usize>, i: usize) -> &[f32] {
        let w = chunk.len();
        let base = self.n * chunk.start + i * w;
        &self.data[base..base + w]
    }
}

/// Coordinate chunks `[0, c2), [c2, 2·c2), ...`, the last one possibly short.
pub fn chunks(d: usize, c2: usize) -> impl Iterator<Item = Range<usize>> {
    (0..d).step_by(c2).map(move |l| l..(l + c2).min(d))
}

/// Which entries of a tile hold a distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TileMask {
    Full,
    /// Only entries with column index greater than row index.
    ColsAbove,
    /// Only entries with column index less than row index.
    ColsBelow,
}

/// Distances for one grid. Row `y`, column `x` holds `δ(v_x, v_y)`.
///
/// A tile produced by the kernel has rows over the grid's `y` range and
/// columns over its `x` range; diagonal grids only hold `x > y`. The mirror
/// tile from [`transpose_into`](Self::transpose_into) swaps the two.
#[derive(Debug, Clone)]
pub struct DistanceTile {
    rows: Range<usize>,
    cols: Range<usize>,
    mask: TileMask,
    values: Vec<Distance>,
}

impl Default for DistanceTile {
    fn default() -> Self {
        Self {
            rows: 0..0,
            cols: 0..0,
            mask: TileMask::Full,
            values: Vec::new(),
        }
    }
}

impl DistanceTile {
    fn reset(&mut self, rows: Range<usize>, cols: Range<usize>, mask: TileMask) {
        let len = rows.len() * cols.len();
        self.rows = rows;
        self.cols = cols;
        self.mask = mask;
        self.values.clear();
        self.values.resize(len, Distance::NAN);
    }

    #[inline]
    pub fn rows(&self) -> Range<usize> {
        self.rows.clone()
    }

    #[inline]
    pub fn cols(&self) -> Range<usize> {
        self.cols.clone()
    }

    #[inline]
    pub fn mask(&self) -> TileMask {
        self.mask
    }

    #[inline]
    fn width(&self) -> usize {
        self.cols.len()
    }

    /// Columns of `row` that hold a distance.
    #[inline]
    pub fn valid_cols(&self, row: usize) -> Range<usize> {
        match self.mask {
            TileMask::Full => self.cols.clone(),
            TileMask::ColsAbove => (row + 1).max(self.cols.start)..self.cols.end,
            TileMask::ColsBelow => self.cols.start..row.min(self.cols.end),
        }
    }

    /// The set entries of `row`, starting at column `valid_cols(row).start`.
    #[inline]
    pub fn row_values(&self, row: usize) -> &[Distance] {
        let cols = self.valid_cols(row);
        if cols.is_empty() {
            return &[];
        }
        let base = (row - self.rows.start) * self.width();
        let lo = cols.start - self.cols.start;
        &self.values[base + lo..base + lo + cols.len()]
    }

    /// Entry at (`row`, `col`) in global indices, if set.
    pub fn get(&self, row: usize, col: usize) -> Option<Distance> {
        if !self.rows.contains(&row) || !self.valid_cols(row).contains(&col) {
            return None;
        }
        Some(self.values[(row - self.rows.start) * self.width() + col - self.cols.start])
    }

    /// Number of set entries.
    pub fn set_count(&self) -> usize {
        self.rows.clone().map(|r| self.valid_cols(r).len()).sum()
    }

    /// Writes the mirror tile (rows and columns swapped) into `out`.
    pub fn transpose_into(&self, out: &mut DistanceTile) {
        const BLOCK: usize = 32;
        let mask = match self.mask {
            TileMask::Full => TileMask::Full,
            TileMask::ColsAbove => TileMask::ColsBelow,
            TileMask::ColsBelow => TileMask::ColsAbove,
        };
        out.reset(self.cols.clone(), self.rows.clone(), mask);
        let (h, w) = (self.rows.len(), self.cols.len());
        for r0 in (0..h).step_by(BLOCK) {
            for c0 in (0..w).step_by(BLOCK) {
                for r in r0..(r0 + BLOCK).min(h) {
                    for c in c0..(c0 + BLOCK).min(w) {
                        out.values[c * h + r] = self.values[r * w + c];
                    }
                }
            }
        }
    }
}

/// Count of pair distances evaluated, kept per lane and summed at the join.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounter(u64);

impl EvalCounter {
    #[inline]
    pub fn add(&mut self, n: u64) {
        self.0 += n;
    }

    #[inline]
    pub fn get(&self) -> u64 {
        self.0
    }
}

impl std::iter::Sum for EvalCounter {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        EvalCounter(iter.map(|c| c.0).sum())
    }
}

/// Staging buffers for one lane, sized from the plan.
#[derive(Debug, Clone, Default)]
pub struct KernelScratch {
    rows: Vec<f32>,
    cols: Vec<f32>,
    acc: Vec<Distance>,
}

impl KernelScratch {
    pub fn new(plan: &GridPlan) -> Self {
        let mut s = Self::default();
        s.fit(plan);
        s
    }

    fn fit(&mut self, plan: &GridPlan) {
        self.rows.resize(plan.bsize * plan.c2, 0.0);
        self.cols.resize(plan.c2 * plan.c1, 0.0);
        self.acc.resize(plan.bsize * plan.c1, 0.0);
    }
}

/// Computes every required pair of `item` into `tile`, reusing its buffer.
pub fn calc_distances_into<M: CumulativeDistance>(
    packed: &PackedDataset,
    metric: &Symmetric<M>,
    item: &WorkItem,
    plan: &GridPlan,
    tile: &mut DistanceTile,
    scratch: &mut KernelScratch,
    counter: &mut EvalCounter,
) -> Result<()> {
    if packed.c2 != plan.c2 {
        return Err(KnnError::config(format!(
            "packed layout uses c2 = {}, plan uses c2 = {}",
            packed.c2, plan.c2
        )));
    }
    if item.x_range.end > packed.n || item.y_range.end > packed.n {
        return Err(KnnError::config("work item lies outside the dataset"));
    }
    let f = metric.inner();
    let mask = if item.diagonal { TileMask::ColsAbove } else { TileMask::Full };
    tile.reset(item.y_range.clone(), item.x_range.clone(), mask);
    scratch.fit(plan);

    let (bsize, c1, c2) = (plan.bsize, plan.c1, plan.c2);
    let tile_w = item.x_range.len();
    let (y_lo, x_lo) = (item.y_range.start, item.x_range.start);
    let KernelScratch { rows, cols, acc } = scratch;

    for y0 in item.y_range.clone().step_by(bsize) {
        let y1 = (y0 + bsize).min(item.y_range.end);
        let rb = y1 - y0;
        for x0 in item.x_range.clone().step_by(c1) {
            let x1 = (x0 + c1).min(item.x_range.end);
            let cw = x1 - x0;
            // Every x in the stage is <= every y in the block.
            if item.diagonal && x1 <= y0 + 1 {
                continue;
            }
            acc[..rb * c1].fill(f.initial());

            for chunk in chunks(packed.d, c2) {
                let w = chunk.len();
                for r in 0..rb {
                    rows[r * c2..r * c2 + w].copy_from_slice(packed.slice(&chunk, y0 + r));
                }
                for c in 0..cw {
                    for (l, &u) in packed.slice(&chunk, x0 + c).iter().enumerate() {
                        cols[l * c1 + c] = u;
                    }
                }
                for r in 0..rb {
                    accumulate_row(
                        f,
                        &rows[r * c2..r * c2 + w],
                        cols,
                        c1,
                        &mut acc[r * c1..r * c1 + cw],
                    );
                }
            }

            let mut stored = 0u64;
            for r in 0..rb {
                let y = y0 + r;
                let first = if item.diagonal { (y + 1).max(x0) } else { x0 };
                let out_row = (y - y_lo) * tile_w;
                for x in first..x1 {
                    let value = f.finalize(acc[r * c1 + (x - x0)]);
                    if !value.is_finite() {
                        return Err(KnnError::NonFiniteDistance {
                            metric: f.name().to_string(),
                            x,
                            y,
                        });
                    }
                    tile.values[out_row + (x - x_lo)] = value;
                }
                stored += x1.saturating_sub(first) as u64;
            }
            counter.add(stored);
        }
    }
    Ok(())
}

/// Advances one block row's partial sums over a staged coordinate chunk.
///
/// `row` holds the chunk of the row vector; `cols[l * c1 + c]` holds
/// coordinate `l` of staged column `c`. The inner loop runs across columns,
/// so each pair still sees the chunk's coordinates in increasing order.
#[inline(always)]
fn accumulate_row<M: CumulativeDistance>(f: &M, row: &[f32], cols: &[f32], c1: usize, acc: &mut [Distance]) {
    let cw = acc.len();
    for (l, &v) in row.iter().enumerate() {
        let col = &cols[l * c1..l * c1 + cw];
        for (a, &u) in acc.iter_mut().zip(col) {
            *a = f.accumulate(u, v, *a);
        }
    }
}

/// Convenience wrapper that packs `ds` and returns a fresh tile.
pub fn calc_distances<M: CumulativeDistance>(
    ds: &Dataset,
    metric: &Symmetric<M>,
    item: &WorkItem,
    plan: &GridPlan,
    counter: &mut EvalCounter,
) -> Result<DistanceTile> {
    let packed = PackedDataset::new(ds, metric, plan.c2)?;
    let mut tile = DistanceTile::default();
    let mut scratch = KernelScratch::new(plan);
    calc_distances_into(&packed, metric, item, plan, &mut tile, &mut scratch, counter)?;
    Ok(tile)
}
