//! Deterministic randomness for the whole pipeline.
//!
//! Every random decision flows through a ChaCha12 substream addressed by
//! `(master_seed, stream_index)`. ChaCha is counter-based: selecting a stream
//! is O(1) and streams are statistically independent, so per-agent draws can
//! be produced in any order — or on any number of threads — and still come
//! out identical. Nothing in the crate ever touches OS entropy.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The pipeline's one RNG flavour.
pub type Substream = ChaCha12Rng;

/// Derive the `index`-th independent stream of a master seed.
pub fn substream(master_seed: u64, index: u64) -> Substream {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(index.into());
    rng
}
