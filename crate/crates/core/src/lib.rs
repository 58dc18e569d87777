//! Exact k-nearest-neighbor search over dense vectors.
//!
//! All pairs `x > y` are computed once in square grids dealt to independent
//! lanes; each lane keeps its own bounded heap per vector, fed with both
//! `(δ, x) → h_y` and `(δ, y) → h_x`. After all lanes finish, the per-lane
//! heaps of every row are merged.
//!
//! ```
//! use tileknn::{engine, generate, DistanceKind, EngineConfig};
//!
//! let ds = generate::generate_uniform(200, 16, 7).unwrap();
//! let out = engine::run_named(&ds, DistanceKind::Hellinger, &EngineConfig::new(5, 2)).unwrap();
//! assert_eq!(out.lists.len(), 200);
//! assert_eq!(out.evaluations, 200 * 199 / 2);
//! ```

pub mod dataset;
pub mod engine;
pub mod error;
pub mod format;
pub mod generate;
pub mod heap;
pub mod kernel;
pub mod merge;
pub mod metric;
pub mod oracle;
pub mod schedule;
pub mod select;

pub use dataset::{Dataset, VectorView};
pub use engine::{run, run_named, EngineConfig, KnnOutput};
pub use error::{KnnError, Result};
pub use heap::{Neighbor, NeighborHeap, NeighborList};
pub use metric::{distance, hellinger, squared_euclidean, CumulativeDistance, Distance, DistanceKind, Symmetric};
pub use oracle::{brute_force_knn, brute_force_named, first_mismatch, Mismatch};
pub use schedule::{lane_of_row, GridPlan, PlanParams, WorkItem};
pub use select::SelectConfig;
