use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for restart (or replicate) `stream` under a master `seed`.
///
/// Streams are independent and addressable, so work can be split across
/// threads without changing any draw.
pub fn restart_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
