//! Seedable, splittable randomness. Every stochastic operation in this crate
//! takes an explicit generator, and independent trial streams are derived from
//! a scenario seed plus a stream index so trials can run in parallel without
//! sharing state.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

/// A root generator for the given seed.
pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// An independent stream derived from `(seed, stream)`. Distinct stream ids
/// never collide for the same seed.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
