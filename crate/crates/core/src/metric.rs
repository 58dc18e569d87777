//! Cumulatively computable distance functions.
//!
//! A distance is a left fold over coordinates `0..d` starting at
//! [`CumulativeDistance::initial`], followed by
//! [`CumulativeDistance::finalize`]. The engine relies on the fold order
//! being fixed: however the outer problem is tiled or chunked, every pair is
//! accumulated in exactly the same order and yields the same bits.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::VectorView;
use crate::error::{KnnError, Result};

/// Accumulator and result type for distances.
#[cfg(not(feature = "f64-accum"))]
pub type Distance = f32;
/// Accumulator and result type for distances.
#[cfg(feature = "f64-accum")]
pub type Distance = f64;

/// A distance computed one coordinate at a time.
///
/// `step(u, v, acc)` is split into a per-coordinate [`prepare`] transform and
/// an [`accumulate`] on prepared values so that the tiled kernel can apply the
/// transform once per coordinate instead of once per pair. Implementations
/// must keep `step(u, v, a) == accumulate(prepare(u), prepare(v), a)`, which
/// the default `step` guarantees.
///
/// [`prepare`]: CumulativeDistance::prepare
/// [`accumulate`]: CumulativeDistance::accumulate
pub trait CumulativeDistance: Send + Sync {
    fn name(&self) -> &str;

    #[inline]
    fn initial(&self) -> Distance {
        0.0
    }

    #[inline]
    fn prepare(&self, x: f32) -> f32 {
        x
    }

    fn accumulate(&self, u: f32, v: f32, acc: Distance) -> Distance;

    #[inline]
    fn step(&self, u: f32, v: f32, acc: Distance) -> Distance {
        self.accumulate(self.prepare(u), self.prepare(v), acc)
    }

    #[inline]
    fn finalize(&self, acc: Distance) -> Distance {
        acc
    }

    /// Per-coordinate validity predicate.
    #[inline]
    fn admits(&self, _x: f32) -> bool {
        true
    }
}

#[inline(always)]
fn squared_difference(u: f32, v: f32, acc: Distance) -> Distance {
    let diff = u as Distance - v as Distance;
    acc + diff * diff
}

/// Squared Hellinger distance, `Σ (√uᵢ − √vᵢ)²`, over nonnegative coordinates.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hellinger;

impl CumulativeDistance for Hellinger {
    fn name(&self) -> &str {
        "hellinger"
    }

    #[inline(always)]
    fn prepare(&self, x: f32) -> f32 {
        x.sqrt()
    }

    #[inline(always)]
    fn accumulate(&self, u: f32, v: f32, acc: Distance) -> Distance {
        squared_difference(u, v, acc)
    }

    #[inline]
    fn admits(&self, x: f32) -> bool {
        x >= 0.0
    }
}

/// Squared Euclidean distance, `Σ (uᵢ − vᵢ)²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquaredEuclidean;

impl CumulativeDistance for SquaredEuclidean {
    fn name(&self) -> &str {
        "sqeuclidean"
    }

    #[inline(always)]
    fn accumulate(&self, u: f32, v: f32, acc: Distance) -> Distance {
        squared_difference(u, v, acc)
    }
}

pub fn hellinger() -> Hellinger {
    Hellinger
}

pub fn squared_euclidean() -> SquaredEuclidean {
    SquaredEuclidean
}

/// Evaluates `f` on a pair of vectors, checking dimensions and domain.
pub fn distance<M: CumulativeDistance + ?Sized>(
    f: &M,
    u: VectorView<'_>,
    v: VectorView<'_>,
) -> Result<Distance> {
    if u.dim() != v.dim() {
        return Err(KnnError::DimensionMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    check_domain(f, u)?;
    check_domain(f, v)?;
    Ok(distance_unchecked(f, u.coords, v.coords))
}

/// The fold itself, without validation.
#[inline]
pub fn distance_unchecked<M: CumulativeDistance + ?Sized>(f: &M, u: &[f32], v: &[f32]) -> Distance {
    let acc = u
        .iter()
        .zip(v)
        .fold(f.initial(), |acc, (&a, &b)| f.step(a, b, acc));
    f.finalize(acc)
}

pub(crate) fn check_domain<M: CumulativeDistance + ?Sized>(f: &M, v: VectorView<'_>) -> Result<()> {
    match v.coords.iter().position(|&x| !f.admits(x)) {
        None => Ok(()),
        Some(coord) => Err(KnnError::Domain {
            metric: f.name().to_string(),
            vector: v.id,
            coord,
            value: v.coords[coord],
        }),
    }
}

/// A distance function that passed the symmetry probe.
///
/// The engine computes each unordered pair once and mirrors the result, so it
/// only accepts functors wrapped in `Symmetric`.
#[derive(Debug, Clone, Copy)]
pub struct Symmetric<M>(M);

const PROBE_PAIRS: usize = 64;
const PROBE_MAX_DIM: usize = 16;

impl<M: CumulativeDistance> Symmetric<M> {
    /// Probes `f` on deterministic pseudo-random pairs and rejects it if any
    /// `δ(u, v)` and `δ(v, u)` differ in a single bit.
    pub fn new(f: M) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_CAFE);
        let mut u = Vec::with_capacity(PROBE_MAX_DIM);
        let mut v = Vec::with_capacity(PROBE_MAX_DIM);
        for pair in 0..PROBE_PAIRS {
            let dim = 1 + pair % PROBE_MAX_DIM;
            u.clear();
            v.clear();
            for _ in 0..dim {
                u.push(unit_f32(&mut rng) * 4.0);
                v.push(unit_f32(&mut rng) * 4.0);
            }
            if !u.iter().chain(&v).all(|&x| f.admits(x)) {
                continue;
            }
            let forward = distance_unchecked(&f, &u, &v);
            let backward = distance_unchecked(&f, &v, &u);
            if forward.to_bits() != backward.to_bits() {
                return Err(KnnError::Asymmetric(f.name().to_string()));
            }
        }
        Ok(Self(f))
    }

    #[inline]
    pub fn inner(&self) -> &M {
        &self.0
    }
}

/// Uniform value in `[0, 1)` built from the top 24 bits of a `u32`.
#[inline]
pub(crate) fn unit_f32(rng: &mut impl RngCore) -> f32 {
    (rng.next_u32() >> 8) as f32 * (1.0 / (1u32 << 24) as f32)
}

/// The distance functions selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    Hellinger,
    SqEuclidean,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 2] = [DistanceKind::Hellinger, DistanceKind::SqEuclidean];

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::Hellinger => "hellinger",
            DistanceKind::SqEuclidean => "sqeuclidean",
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceKind {
    type Err = KnnError;

    fn from_str(s: &str) -> Result<Self> {
        DistanceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| KnnError::UnknownDistance(s.to_string()))
    }
}
