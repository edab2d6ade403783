//! Deterministic, splittable random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream keyed by
//! `(seed, domain, index)`. The 32-byte ChaCha key is laid out as
//! `seed · domain · index · zeros` (little-endian u64 words), so sample `i`
//! of a given seed is reproducible in isolation and independent of the order
//! in which other samples are generated. This is what lets frames and
//! trajectories be generated in parallel without changing any output byte.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::{RngCore, SeedableRng};

/// Independent sub-stream families of one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamDomain {
    /// Scalar Gaussian random fields (stream functions, vorticity inits).
    GrfScalar = 1,
    /// Grid white noise for the finite-difference noise path.
    WhiteNoise = 2,
    /// Per-trajectory initial-condition seeds.
    TrajectoryInit = 3,
    /// Per-trajectory forcing phases.
    ForcingPhase = 4,
}

/// RNG for stream `index` of `(seed, domain)`.
pub fn derive_rng(seed: u64, domain: StreamDomain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// A fresh 64-bit seed derived from `(seed, domain, index)`.
pub fn derive_seed(seed: u64, domain: StreamDomain, index: u64) -> u64 {
    derive_rng(seed, domain, index).next_u64()
}

/// A uniform draw in `[0, 1)` derived from `(seed, domain, index)`.
pub fn derive_unit_uniform(seed: u64, domain: StreamDomain, index: u64) -> f64 {
    (derive_seed(seed, domain, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
