//! Seeded uniform datasets.
//!
//! Row `i` is drawn from ChaCha8 seeded with `seed_from_u64(seed)` on stream
//! `i`; each coordinate is `(next_u32 >> 8) · 2⁻²⁴`, uniform on `[0, 1)`.
//! Rows are independent streams, so any row can be regenerated on its own and
//! the bytes do not depend on platform or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::metric::unit_f32;

pub fn generate_row(seed: u64, row: usize, d: usize) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    (0..d).map(|_| unit_f32(&mut rng)).collect()
}

pub fn generate_uniform(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    let mut values = Vec::with_capacity(n * d);
    for row in 0..n {
        values.extend(generate_row(seed, row, d));
    }
    Dataset::new(n, d, values)
}
