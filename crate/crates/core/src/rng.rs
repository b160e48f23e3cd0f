//! Deterministic, platform-stable random streams.
//!
//! A [`RngStream`] is addressed by a (master seed, stream id) pair; identical
//! pairs reproduce identical sample sequences on any platform. Independent
//! logical trials use independent streams (`stream_id` = trial id), so trial
//! results do not depend on execution order or schedule. Streams are not
//! shared between trials.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded ChaCha8 stream. The 256-bit key is (master_seed, stream_id, 0…),
/// so distinct ids give independent generators.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&stream_id.to_le_bytes());
        Self {
            master_seed,
            stream_id,
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Pair of independent standard normals (Box–Muller).
    pub fn normal_pair(&mut self) -> (f64, f64) {
        // Shift u1 away from 0 so the log is finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        (r * theta.cos(), r * theta.sin())
    }

    /// Samples an index from a probability vector (entries near-nonnegative,
    /// summing to ~1). Zero-probability outcomes are never selected.
    pub fn sample_index(&mut self, probabilities: &[f64]) -> usize {
        debug_assert!(!probabilities.is_empty());
        let u = self.uniform();
        let mut cum = 0.0;
        let mut last_positive = 0;
        for (i, &p) in probabilities.iter().enumerate() {
            if p > 0.0 {
                cum += p;
                last_positive = i;
                if u < cum {
                    return i;
                }
            }
        }
        // Floating dust can leave cum slightly below 1; fall back to the last
        // outcome that had positive probability.
        last_positive
    }
}
