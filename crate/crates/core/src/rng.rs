//! Deterministic random streams.
//!
//! Every stochastic component of a run (user placement, mobility, shadow
//! fading, blockage draws, policy init, action sampling) owns its own
//! [`RandomSource`] derived from the run seed by a stable label, so adding
//! draws to one component never perturbs another. Identical `(seed, label)`
//! pairs produce identical streams on every platform.

use alloc::string::String;
// With std in the crate graph (tests), inherent f64 methods shadow this trait.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Seedable, cloneable stream of random draws backed by ChaCha8.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    label: String,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn from_seed(seed: u64) -> Self {
        Self::derive_raw(seed, "root", 0)
    }

    /// Independent child stream identified by `(label, index)`.
    pub fn derive(&self, label: &str, index: u64) -> Self {
        Self::derive_raw(self.seed ^ fnv1a64(self.label.as_bytes()), label, index)
    }

    fn derive_raw(seed: u64, label: &str, index: u64) -> Self {
        let mut state = seed ^ fnv1a64(label.as_bytes()) ^ index.wrapping_mul(0xa076_1d64_78bd_642f);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self {
            seed,
            label: String::from(label),
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform in `[lo, hi)`; `lo == hi` returns `lo`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        if lo >= hi {
            return lo;
        }
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        // 1 - u keeps the log argument in (0, 1].
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (TWO_PI * u2).cos()
    }

    /// Complex Gaussian with zero mean and unit total variance
    /// (each component is N(0, 1/2)).
    pub fn complex_gaussian_unit(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-u1.ln()).sqrt();
        let theta = TWO_PI * u2;
        (r * theta.cos(), r * theta.sin())
    }

    /// Index sampled from an (unnormalized) nonnegative weight vector.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        debug_assert!(!weights.is_empty());
        let total: f64 = weights.iter().sum();
        let mut target = self.uniform() * total;
        for (i, &w) in weights.iter().enumerate() {
            target -= w;
            if target < 0.0 {
                return i;
            }
        }
        weights.len() - 1
    }
}
