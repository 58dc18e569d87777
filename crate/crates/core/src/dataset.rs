//! Dense, immutable collections of equal-length vectors.

use crate::error::{KnnError, Result};

/// `n` vectors of dimension `d`, stored row-major in single precision.
///
/// Construction rejects `n < 2`, `d == 0` and any non-finite coordinate, so
/// every distance computed from a `Dataset` orders totally.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    values: Vec<f32>,
}

impl Dataset {
    pub fn new(n: usize, d: usize, values: Vec<f32>) -> Result<Self> {
        if n < 2 {
            return Err(KnnError::Dataset(format!("need at least 2 vectors, got {n}")));
        }
        if d == 0 {
            return Err(KnnError::Dataset("dimension must be at least 1".into()));
        }
        let expected = n
            .checked_mul(d)
            .ok_or_else(|| KnnError::Dataset(format!("{n} x {d} overflows")))?;
        if values.len() != expected {
            return Err(KnnError::Dataset(format!(
                "expected {expected} coordinates for {n} x {d}, got {}",
                values.len()
            )));
        }
        if u32::try_from(n).is_err() {
            return Err(KnnError::Dataset(format!("{n} vectors exceed the u32 index space")));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(KnnError::Dataset(format!(
                "vector {} coordinate {} is not finite ({})",
                pos / d,
                pos % d,
                values[pos]
            )));
        }
        Ok(Self { n, d, values })
    }

    /// Builds a dataset from per-vector rows.
    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(KnnError::Dataset(format!(
                    "vector {i} has dimension {}, expected {d}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), d, values)
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
    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn vector(&self, i: usize) -> VectorView<'_> {
        VectorView {
            id: i,
            coords: &self.values[i * self.d..(i + 1) * self.d],
        }
    }

    pub fn vectors(&self) -> impl Iterator<Item = VectorView<'_>> + '_ {
        (0..self.n).map(move |i| self.vector(i))
    }
}

/// A borrowed vector together with its id, so domain errors can name it.
#[derive(Debug, Clone, Copy)]
pub struct VectorView<'a> {
    pub id: usize,
    pub coords: &'a [f32],
}

impl<'a> VectorView<'a> {
    pub fn new(id: usize, coords: &'a [f32]) -> Self {
        Self { id, coords }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}
