//! Seeded random streams.
//!
//! Every stochastic operation draws from an [`RngStream`], a ChaCha8 generator
//! keyed by a 64-bit master seed and selected by a 64-bit stream id:
//!
//! * key: `ChaCha8Rng::seed_from_u64(master_seed)` (rand_core's PCG32 key
//!   expansion of the 64-bit seed into a 256-bit key),
//! * stream: `set_stream(stream_id)`,
//! * `uniform()`: `(next_u64() >> 11) * 2^-53`, a value in `[0, 1)`,
//! * `below(n)`: rejection sampling on `next_u64()` against the largest
//!   multiple of `n`,
//! * `bit()`: low bit of `next_u64()`.
//!
//! Identical `(master_seed, stream_id)` pairs give identical sequences on every
//! platform. Batch runs assign one stream per trial index.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl Seed {
    pub const fn new(master_seed: u64) -> Self {
        Seed {
            master_seed,
            stream_id: 0,
        }
    }

    pub const fn with_stream(self, stream_id: u64) -> Self {
        Seed {
            master_seed: self.master_seed,
            stream_id,
        }
    }

    pub fn stream(self) -> RngStream {
        RngStream::new(self)
    }
}

impl From<u64> for Seed {
    fn from(master_seed: u64) -> Self {
        Seed::new(master_seed)
    }
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: Seed,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: Seed) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed.master_seed);
        inner.set_stream(seed.stream_id);
        RngStream { seed, inner }
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    /// Derives an independent stream for a sub-task, keyed off this stream's
    /// master seed. Sub-streams occupy ids above `2^32` so they do not collide
    /// with per-trial ids.
    pub fn fork(&mut self) -> RngStream {
        let id = (1u64 << 32) | (self.next_u64() >> 32);
        RngStream::new(self.seed.with_stream(id))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bit(&mut self) -> u8 {
        (self.next_u64() & 1) as u8
    }

    pub fn coin(&mut self) -> bool {
        self.bit() == 1
    }

    /// Uniform integer in `[0, n)`. `n` must be nonzero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    /// Uniform integer in `[lo, hi)`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.below(hi - lo)
    }

    /// Chooses `k` distinct indices out of `0..n`, returned in ascending order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool.sort_unstable();
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = Seed::new(7).with_stream(3).stream();
        let mut b = Seed::new(7).with_stream(3).stream();
        let xs: Vec<u64> = (0..64).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..64).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn streams_differ() {
        let mut a = Seed::new(7).with_stream(0).stream();
        let mut b = Seed::new(7).with_stream(1).stream();
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = Seed::new(1).stream();
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn below_is_roughly_uniform() {
        let mut r = Seed::new(2).stream();
        let mut counts = [0u32; 6];
        for _ in 0..60_000 {
            counts[r.below(6) as usize] += 1;
        }
        for c in counts {
            assert!((9_500..10_500).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn sample_indices_distinct_sorted() {
        let mut r = Seed::new(3).stream();
        let idx = r.sample_indices(100, 20);
        assert_eq!(idx.len(), 20);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        assert!(idx.iter().all(|&i| i < 100));
    }
}
