//! Deterministic random source shared by every randomized procedure.
//!
//! Backed by ChaCha with 8 rounds. Every draw goes through fixed-width
//! integer sampling so a seed yields the same stream on every platform.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seedable, platform-independent generator.
#[derive(Clone, Debug)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream `stream` under `seed`. Used to give each
    /// ciphertext word its own generator so bits can be encoded in any order.
    pub fn derived(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }

    /// Uniform in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "empty sampling range");
        self.inner.random_range(0..n as u64) as usize
    }

    /// Uniform in `lo..=hi`.
    pub fn inclusive(&mut self, lo: usize, hi: usize) -> usize {
        assert!(lo <= hi, "empty sampling range {lo}..={hi}");
        self.inner.random_range(lo as u64..=hi as u64) as usize
    }

    pub fn coin(&mut self) -> bool {
        self.inner.random_range(0..2u32) == 1
    }

    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    /// Partial Fisher-Yates: `count` distinct indices out of `0..n`, in draw order.
    pub fn sample_indices(&mut self, n: usize, count: usize) -> Vec<usize> {
        assert!(count <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..count {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool
    }
}
