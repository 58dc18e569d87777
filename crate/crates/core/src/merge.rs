//! Final phase: combine each row's per-lane heaps into one neighbor list.

use crate::error::{KnnError, Result};
use crate::heap::{Neighbor, NeighborHeap, NeighborList};
use crate::select::HeapStore;

/// Merges the partial heaps of `query` into its `k` nearest neighbors.
///
/// Lanes cover disjoint pairs, so an index reported by two partials means the
/// schedule was violated.
pub fn merge_row<I>(query: usize, partials: I, k: usize) -> Result<NeighborList>
where
    I: IntoIterator<Item = NeighborHeap>,
{
    let lists: Vec<Vec<Neighbor>> = partials
        .into_iter()
        .map(NeighborHeap::into_sorted_vec)
        .filter(|l| !l.is_empty())
        .collect();

    if lists.len() > 1 {
        let mut indices: Vec<u32> = lists.iter().flatten().map(|nb| nb.index).collect();
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(KnnError::DuplicateNeighbor {
                row: query,
                index: w[0] as usize,
            });
        }
    }

    let total: usize = lists.iter().map(Vec::len).sum();
    let mut out = Vec::with_capacity(k.min(total));
    let mut heads = vec![0usize; lists.len()];
    while out.len() < k {
        let best = lists
            .iter()
            .zip(&heads)
            .enumerate()
            .filter_map(|(lane, (list, &h))| list.get(h).map(|nb| (lane, nb)))
            .min_by(|a, b| a.1.cmp(b.1));
        match best {
            Some((lane, &nb)) => {
                out.push(nb);
                heads[lane] += 1;
            }
            None => break,
        }
    }
    Ok(NeighborList::new(query, out))
}

/// Merges every row, `0..n`, across all lanes' heap stores.
pub fn merge_all(lane_stores: Vec<HeapStore>, n: usize, k: usize) -> Result<Vec<NeighborList>> {
    if let Some(bad) = lane_stores.iter().find(|s| s.len() != n) {
        return Err(KnnError::config(format!(
            "heap store holds {} rows, expected {n}",
            bad.len()
        )));
    }
    let mut lanes: Vec<_> = lane_stores.into_iter().map(|s| s.into_heaps().into_iter()).collect();
    (0..n)
        .map(|row| {
            let partials: Vec<NeighborHeap> = lanes
                .iter_mut()
                .map(|it| it.next().expect("store length checked"))
                .collect();
            merge_row(row, partials, k)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Distance;
    use proptest::prelude::*;

    fn heap_of(k: usize, entries: &[(Distance, u32)]) -> NeighborHeap {
        let mut h = NeighborHeap::new(k);
        for &(d, i) in entries {
            h.push(Neighbor::new(d, i));
        }
        h
    }

    #[test]
    fn single_lane_is_a_drain() {
        let h = heap_of(3, &[(3.0, 1), (1.0, 2), (2.0, 3)]);
        let list = merge_row(0, [h.clone()], 2).unwrap();
        assert_eq!(list.neighbors, h.into_sorted_vec()[..2].to_vec());
    }

    #[test]
    fn two_lanes_interleave() {
        let a = heap_of(2, &[(1.0, 2), (3.0, 4)]);
        let b = heap_of(2, &[(2.0, 7)]);
        let list = merge_row(9, [a, b], 2).unwrap();
        assert_eq!(list.query, 9);
        assert_eq!(list.neighbors, vec![Neighbor::new(1.0, 2), Neighbor::new(2.0, 7)]);
    }

    #[test]
    fn duplicate_index_across_lanes_is_an_error() {
        let a = heap_of(2, &[(1.0, 2)]);
        let b = heap_of(2, &[(1.5, 2)]);
        let err = merge_row(4, [a, b], 2).unwrap_err();
        assert!(matches!(err, KnnError::DuplicateNeighbor { row: 4, index: 2 }));
    }

    #[test]
    fn short_rows_return_everything() {
        let mut s = HeapStore::new(3, 5);
        s.get_mut(0).push(Neighbor::new(1.0, 1));
        s.get_mut(0).push(Neighbor::new(2.0, 2));
        let lists = merge_all(vec![s], 3, 5).unwrap();
        assert_eq!(lists.len(), 3);
        assert_eq!(lists[0].len(), 2);
        assert!(lists[1].is_empty());
    }

    #[test]
    fn four_lanes_match_sort_oracle() {
        use rand::{seq::SliceRandom, Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let mut ids: Vec<u32> = (0..400).collect();
        ids.shuffle(&mut rng);
        let mut everything = Vec::new();
        let heaps: Vec<NeighborHeap> = ids
            .chunks(100)
            .map(|chunk| {
                let mut h = NeighborHeap::new(100);
                for &i in chunk {
                    let nb = Neighbor::new(rng.gen::<f32>() as Distance, i);
                    everything.push(nb);
                    h.push(nb);
                }
                h
            })
            .collect();
        everything.sort();
        let list = merge_row(1000, heaps, 50).unwrap();
        assert_eq!(list.neighbors, everything[..50].to_vec());
    }

    proptest! {
        #[test]
        fn permutation_invariant(
            lanes in prop::collection::vec(prop::collection::vec(0u8..8, 0..12), 1..5),
            k in 0usize..20,
            rot in 0usize..5,
        ) {
            let mut next = 0u32;
            let heaps: Vec<NeighborHeap> = lanes.iter().map(|dists| {
                let mut h = NeighborHeap::new(12);
                for &d in dists {
                    h.push(Neighbor::new(d as Distance, next));
                    next += 1;
                }
                h
            }).collect();
            let total: usize = heaps.iter().map(NeighborHeap::len).sum();
            let mut rotated = heaps.clone();
            let len = rotated.len();
            rotated.rotate_left(rot % len);
            let a = merge_row(0, heaps, k).unwrap();
            let b = merge_row(0, rotated, k).unwrap();
            prop_assert_eq!(a.len(), k.min(total));
            prop_assert!(a.neighbors.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(a, b);
        }
    }
}
