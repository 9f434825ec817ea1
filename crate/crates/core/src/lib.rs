//! Hybrid QUBO solver built on weighted independent sets of unit-disk graphs.
//!
//! A QUBO instance is laid out in the plane as a weighted unit-disk graph,
//! the plane is cut into square boxes, each box is solved by simulating the
//! adiabatic dynamics of a Rydberg-atom register, and the per-box answers are
//! merged greedily by weight. A simulated-annealing solver and an exhaustive
//! oracle are provided for comparison.

pub mod ahs;
pub mod anneal;
pub mod bench;
pub mod embedding;
mod error;
pub mod merger;
pub mod partition;
pub mod portfolio;
pub mod qubo;

pub use error::{Error, Result};

/// Deterministic 64-bit mixer (SplitMix64 finalizer) used to derive
/// independent per-job seeds from a global seed.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
