//! Bounded max-heaps that keep the `k` smallest neighbors seen so far.

use std::cmp::Ordering;

use crate::metric::Distance;

/// A candidate neighbor: distance to the query plus the neighbor's id.
///
/// Ordered by distance, then by index, so that ties at the k-boundary go to
/// the smaller index and every stream has a unique top-k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub distance: Distance,
    pub index: u32,
}

impl Neighbor {
    #[inline]
    pub fn new(distance: Distance, index: u32) -> Self {
        Self { distance, index }
    }
}

impl Eq for Neighbor {}

impl Ord for Neighbor {
    #[inline]
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Neighbor {
    #[inline]
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Max-heap of at most `capacity` neighbors; the root is the largest kept,
/// i.e. the k-th smallest once the heap is full.
#[derive(Debug, Clone)]
pub struct NeighborHeap {
    capacity: usize,
    entries: Vec<Neighbor>,
}

impl NeighborHeap {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            entries: Vec::with_capacity(capacity),
        }
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    #[inline]
    pub fn root(&self) -> Option<&Neighbor> {
        self.entries.first()
    }

    /// Whether [`push`](Self::push) would keep `candidate`.
    #[inline]
    pub fn admits(&self, candidate: &Neighbor) -> bool {
        if !self.is_full() {
            return self.capacity > 0;
        }
        candidate < &self.entries[0]
    }

    /// Offers a candidate. Returns `true` if it was kept.
    pub fn push(&mut self, candidate: Neighbor) -> bool {
        if self.entries.len() < self.capacity {
            self.entries.push(candidate);
            self.sift_up(self.entries.len() - 1);
            true
        } else if self.capacity > 0 && candidate < self.entries[0] {
            self.entries[0] = candidate;
            self.sift_down(0);
            true
        } else {
            false
        }
    }

    /// Removes every entry and returns them in ascending order.
    pub fn drain_sorted(&mut self) -> Vec<Neighbor> {
        let mut out = std::mem::take(&mut self.entries);
        out.sort_unstable();
        self.entries = Vec::with_capacity(self.capacity);
        out
    }

    pub fn into_sorted_vec(mut self) -> Vec<Neighbor> {
        self.entries.sort_unstable();
        self.entries
    }

    /// Entries in heap order.
    pub fn as_slice(&self) -> &[Neighbor] {
        &self.entries
    }

    /// Checks the max-heap property over every parent/child pair.
    pub fn is_valid(&self) -> bool {
        self.entries.len() <= self.capacity
            && (1..self.entries.len()).all(|i| self.entries[(i - 1) / 2] >= self.entries[i])
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.entries[i] <= self.entries[parent] {
                break;
            }
            self.entries.swap(i, parent);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let len = self.entries.len();
        loop {
            let left = 2 * i + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let larger = if right < len && self.entries[right] > self.entries[left] {
                right
            } else {
                left
            };
            if self.entries[i] >= self.entries[larger] {
                break;
            }
            self.entries.swap(i, larger);
            i = larger;
        }
    }
}

/// The final answer for one query: up to `k` neighbors, ascending, self excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub query: usize,
    pub neighbors: Vec<Neighbor>,
}

impl NeighborList {
    pub fn new(query: usize, neighbors: Vec<Neighbor>) -> Self {
        Self { query, neighbors }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Strictly ascending and free of the query itself.
    pub fn is_well_formed(&self) -> bool {
        self.neighbors.windows(2).all(|w| w[0] < w[1])
            && self.neighbors.iter().all(|nb| nb.index as usize != self.query)
    }
}
