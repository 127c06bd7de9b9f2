//! Shared helpers for the benchmark targets.

use fofdm_core::layered_tx::FrameContext;
use fofdm_core::{FrameConfig, Normalization};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Standard two-layer 4-PAM context at the default transform size.
pub fn two_layer_ctx() -> FrameContext {
    let cfg = FrameConfig::new(256, &[4, 4], Normalization::UnitOpticalPower, 0).unwrap();
    FrameContext::new(cfg).unwrap()
}

pub fn random_bits(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

pub fn random_block(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}
