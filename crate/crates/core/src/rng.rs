//! Counter-based random streams: every (seed, stream) pair gets its own
//! ChaCha8 keystream, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep classical and quantum draws from sharing streams.
#[derive(Clone, Copy, Debug)]
pub enum Domain {
    Classical = 1,
    Quantum = 2,
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8] = domain as u8;
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
