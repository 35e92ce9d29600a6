//! Per-point work distribution.
//!
//! Every per-point computation in this crate is a pure function of an
//! immutable snapshot, so mapping it over a rayon pool yields the same bits
//! as a sequential loop. Setting [`SINGLE_THREAD_ENV`] to anything other
//! than `0` or empty forces the sequential path, which is useful when
//! auditing reproducibility.

use std::sync::OnceLock;

use rayon::prelude::*;

pub const SINGLE_THREAD_ENV: &str = "FLATFIELD_SINGLE_THREAD";

// Below this many points the pool overhead dominates.
const PARALLEL_MIN_POINTS: usize = 64;

pub fn single_threaded() -> bool {
    static FLAG: OnceLock<bool> = OnceLock::new();
    *FLAG.get_or_init(|| match std::env::var(SINGLE_THREAD_ENV) {
        Ok(v) => !(v.is_empty() || v == "0"),
        Err(_) => false,
    })
}

pub(crate) fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if n < PARALLEL_MIN_POINTS || single_threaded() {
        (0..n).map(f).collect()
    } else {
        (0..n).into_par_iter().map(f).collect()
    }
}
