//! Reproducible random streams for replica-parallel simulation.
//!
//! Streams are counter-based: replica `i` of a run draws from the ChaCha12
//! stream keyed by `(seed, i)`, so replicas are mutually independent and the
//! set of draws does not depend on scheduling or on how replicas are split
//! across threads. All conversions from raw bits are done here so results are
//! identical across platforms and library versions.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// One replica's private random stream.
#[derive(Debug, Clone)]
pub struct ReplicaRng {
    inner: ChaCha12Rng,
}

impl ReplicaRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential waiting time with the given rate.
    #[inline]
    pub fn exp(&mut self, rate: f64) -> f64 {
        // 1 - unit() is in (0, 1], so the log is finite
        -(1.0 - self.unit()).ln() / rate
    }

    /// Sample an index from a finite probability row.
    #[inline]
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let u = self.unit();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last_positive = i;
                if u < acc {
                    return i;
                }
            }
        }
        // u fell into the rounding slack beyond the accumulated mass
        last_positive
    }
}
