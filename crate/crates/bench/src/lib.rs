//! Shared fixtures for the benchmarks.

use itboost::synth::{two_gaussians, SynthSpec};
use itboost::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform random symbols in `0..alphabet`.
pub fn random_symbols(len: usize, alphabet: u8, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(0..alphabet)).collect()
}

/// Default two-Gaussian task with `n` rows.
pub fn task(n: usize, seed: u64) -> Dataset {
    two_gaussians(&SynthSpec {
        n,
        seed,
        ..SynthSpec::default()
    })
    .expect("valid synthetic spec")
}
