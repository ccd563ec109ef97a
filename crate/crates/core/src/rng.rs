//! Reproducible per-replicate random streams and replicate fan-out.
//!
//! Replicate `r` of a run seeded with `seed` draws from a ChaCha8 stream
//! seeded with `seed ^ r`, so any single replicate can be rerun in isolation.
//! Results are always returned in replicate order regardless of `jobs`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type ReplicateRng = ChaCha8Rng;

pub fn replicate_rng(seed: u64, replicate: u64) -> ReplicateRng {
    ChaCha8Rng::seed_from_u64(seed ^ replicate)
}

/// Runs `f(state, r)` for `r in 0..count`, with one `init()` state per worker.
///
/// `jobs == 0` uses the global rayon pool, `jobs == 1` runs on the calling
/// thread, anything else a dedicated pool of that size.
pub fn run_replicates<S, R, I, F>(count: u64, jobs: usize, init: I, f: F) -> Vec<R>
where
    R: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> R + Sync + Send,
{
    match jobs {
        1 => {
            let mut state = init();
            (0..count).map(|r| f(&mut state, r)).collect()
        }
        0 => (0..count).into_par_iter().map_init(&init, &f).collect(),
        k => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| (0..count).into_par_iter().map_init(&init, &f).collect()),
            Err(e) => {
                log::warn!("could not build a pool of {k} threads ({e}); running on the global pool");
                (0..count).into_par_iter().map_init(&init, &f).collect()
            }
        },
    }
}
