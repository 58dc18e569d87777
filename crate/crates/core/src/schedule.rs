//! Decomposition of the pairwise problem into grids and their lane assignment.
//!
//! The `n x n` problem is cut into square grids of side `gsize`. Only grids on
//! or above the diagonal (`X >= Y`) are scheduled; inside a diagonal grid only
//! pairs with `x > y` are computed. Grid rows are dealt to lanes in a
//! back-and-forth order (0, 1, .., L-1, L-1, .., 1, 0, 0, 1, ..) so that long
//! rows near the top pair up with short rows near the bottom.

use std::ops::Range;

use crate::error::{KnnError, Result};

pub const DEFAULT_MAX_GSIZE: usize = 4096;
pub const DEFAULT_BSIZE: usize = 64;
pub const DEFAULT_C1: usize = 32;
pub const DEFAULT_C2: usize = 32;

/// Lane that owns grid row `grid_row`.
#[inline]
pub fn lane_of_row(grid_row: usize, n_lanes: usize) -> usize {
    assert!(n_lanes >= 1, "n_lanes must be at least 1");
    let r = grid_row % (2 * n_lanes);
    if r < n_lanes {
        r
    } else {
        2 * n_lanes - 1 - r
    }
}

/// Optional tiling parameters; unset fields take the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlanParams {
    pub gsize: Option<usize>,
    pub bsize: Option<usize>,
    pub c1: Option<usize>,
    pub c2: Option<usize>,
}

impl PlanParams {
    pub fn resolve(&self, n: usize, n_lanes: usize) -> Result<GridPlan> {
        let bsize = self.bsize.unwrap_or(DEFAULT_BSIZE);
        let gsize = match self.gsize {
            Some(g) => g,
            None => default_gsize(n, bsize),
        };
        GridPlan::new(
            n,
            gsize,
            bsize,
            self.c1.unwrap_or(DEFAULT_C1),
            self.c2.unwrap_or(DEFAULT_C2),
            n_lanes,
        )
    }
}

/// `min(4096, n rounded up to a multiple of bsize)`.
pub fn default_gsize(n: usize, bsize: usize) -> usize {
    let bsize = bsize.max(1);
    DEFAULT_MAX_GSIZE.min(n.div_ceil(bsize).max(1) * bsize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPlan {
    pub n: usize,
    pub gsize: usize,
    pub bsize: usize,
    pub c1: usize,
    pub c2: usize,
    pub n_grids: usize,
    pub n_lanes: usize,
}

impl GridPlan {
    pub fn new(n: usize, gsize: usize, bsize: usize, c1: usize, c2: usize, n_lanes: usize) -> Result<Self> {
        if n == 0 {
            return Err(KnnError::config("n must be at least 1"));
        }
        if bsize == 0 {
            return Err(KnnError::config("bsize must be at least 1"));
        }
        if gsize < bsize {
            return Err(KnnError::config(format!("gsize ({gsize}) must be at least bsize ({bsize})")));
        }
        if c1 == 0 {
            return Err(KnnError::config("c1 must be at least 1"));
        }
        if c2 == 0 {
            return Err(KnnError::config("c2 must be at least 1"));
        }
        if n_lanes == 0 {
            return Err(KnnError::config("lane count must be at least 1"));
        }
        Ok(Self {
            n,
            gsize,
            bsize,
            c1,
            c2,
            n_grids: (n - 1) / gsize + 1,
            n_lanes,
        })
    }

    /// Index interval covered by grid coordinate `g`, clipped to `[0, n)`.
    #[inline]
    pub fn span(&self, g: usize) -> Range<usize> {
        let start = g * self.gsize;
        start..(start + self.gsize).min(self.n)
    }

    pub fn work_item(&self, grid_x: usize, grid_y: usize) -> WorkItem {
        debug_assert!(grid_x >= grid_y && grid_x < self.n_grids);
        WorkItem {
            grid_x,
            grid_y,
            diagonal: grid_x == grid_y,
            x_range: self.span(grid_x),
            y_range: self.span(grid_y),
        }
    }

    /// Upper-triangle grids owned by `lane`, grid rows outer, columns inner.
    pub fn work_items_for_lane(&self, lane: usize) -> impl Iterator<Item = WorkItem> + '_ {
        assert!(lane < self.n_lanes, "lane {lane} out of range for {} lanes", self.n_lanes);
        (0..self.n_grids)
            .filter(move |&y| lane_of_row(y, self.n_lanes) == lane)
            .flat_map(move |y| (y..self.n_grids).map(move |x| self.work_item(x, y)))
    }

    /// Number of grids scheduled on each lane.
    pub fn grids_per_lane(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_lanes];
        for y in 0..self.n_grids {
            counts[lane_of_row(y, self.n_lanes)] += self.n_grids - y;
        }
        counts
    }
}

/// One scheduled grid `(X, Y)` with `X >= Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkItem {
    pub grid_x: usize,
    pub grid_y: usize,
    pub diagonal: bool,
    pub x_range: Range<usize>,
    pub y_range: Range<usize>,
}

impl WorkItem {
    /// Number of `(x, y)` pairs with `x > y` inside this grid.
    pub fn pair_count(&self) -> usize {
        let w = self.x_range.len();
        if self.diagonal {
            w * (w - 1) / 2
        } else {
            w * self.y_range.len()
        }
    }
}
