//! Portable seeded randomness.
//!
//! All draws come from xoshiro256** seeded from a 64-bit value through
//! SplitMix64 (the reference `seed_from_u64` expansion). The derived
//! quantities use fixed formulas so other implementations can reproduce them:
//!
//! * index in `[0, n)`: `(next_u64() as u128 * n as u128) >> 64`
//! * unit float in `[0, 1)`: `(next_u64() >> 11) * 2^-53`
//! * shuffle: Fisher-Yates from the last position down, swapping `i` with
//!   an index drawn in `[0, i]`
//! * substream `r` of seed `s`: the generator for `s` advanced by `r` calls
//!   to the xoshiro256** `jump()` function (2^128 steps each)

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Debug, Clone)]
pub struct SeededRng(Xoshiro256StarStar);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn substream(seed: u64, index: u64) -> Self {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        for _ in 0..index {
            rng.jump();
        }
        Self(rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform index in `[0, n)`.
    pub fn index(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Uniform float in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.unit()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffle_is_a_deterministic_permutation() {
        let mut a: Vec<usize> = (0..50).collect();
        let mut b = a.clone();
        SeededRng::new(7).shuffle(&mut a);
        SeededRng::new(7).shuffle(&mut b);
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(a, sorted);
    }

    #[test]
    fn substreams_differ() {
        let a = SeededRng::substream(3, 0).next_u64();
        let b = SeededRng::substream(3, 1).next_u64();
        assert_ne!(a, b);
        assert_eq!(a, SeededRng::new(3).next_u64());
    }

    #[test]
    fn unit_range() {
        let mut r = SeededRng::new(1);
        for _ in 0..1000 {
            let u = r.uniform(-0.5, 0.5);
            assert!((-0.5..0.5).contains(&u));
        }
    }
}
