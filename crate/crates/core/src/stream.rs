//! Seed-derived random streams and deterministic sharded reduction.
//!
//! Every Monte Carlo experiment splits its budget into a fixed number of
//! shards. Shard `s` of experiment `id` under seed `seed` draws from its own
//! ChaCha stream, so results do not depend on how many worker threads run
//! the shards or in which order they finish.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Number of shards used by sampling experiments.
pub const SHARDS: usize = 64;

/// FNV-1a, stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Independent stream for `(seed, experiment, shard)`.
pub fn stream(seed: u64, experiment: &str, shard: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a(experiment.as_bytes()).to_le_bytes());
    key[16..24].copy_from_slice(&fnv1a(&seed.to_be_bytes()).to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(shard);
    rng
}

/// Split `total` into `shards` nearly equal parts, larger parts first.
pub fn split_budget(total: usize, shards: usize) -> Vec<usize> {
    let base = total / shards;
    let extra = total % shards;
    (0..shards).map(|s| base + usize::from(s < extra)).collect()
}

/// Map over shard indices, in parallel when the `parallel` feature is on.
/// The output order always matches the shard order.
pub fn map_shards<T, F>(shards: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..shards).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..shards).map(f).collect()
    }
}

/// Parallel map over a slice with order-preserving output.
pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
