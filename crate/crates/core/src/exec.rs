//! Replicate dispatch.
//!
//! With the `parallel` feature (on by default) replicates are spread over the
//! rayon pool; without it, or when [`Execution::Sequential`] is requested,
//! they run in index order on the calling thread. Results always come back
//! in replicate-index order, so any reduction over them is bit-stable.

use crate::rng::{replicate_stream, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `Parallel` when the crate was built with rayon, else `Sequential`.
    pub fn available() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Run `f(index, rng)` for `index in 0..n` with per-replicate streams derived
/// from `master_seed`, returning the results in index order.
pub fn map_replicates<T, F>(n: usize, master_seed: u64, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> T + Sync + Send,
{
    map_indices(n, exec, |i| {
        let mut rng = replicate_stream(master_seed, i);
        f(i, &mut rng)
    })
}

/// Ordered map over `0..n` without any RNG plumbing.
pub fn map_indices<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n as u64).into_par_iter().map(f).collect()
        }
        _ => (0..n as u64).map(f).collect(),
    }
}

/// Run `body` inside a dedicated pool of `threads` workers (`None` keeps the
/// global pool). A sequential build ignores the request.
pub fn with_threads<R: Send>(threads: Option<usize>, body: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            return pool.install(body);
        }
    }
    let _ = threads;
    body()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn parallel_and_sequential_agree() {
        let f = |i: u64, rng: &mut SimRng| (i, rng.random::<u64>());
        let a = map_replicates(257, 11, Execution::Sequential, f);
        let b = map_replicates(257, 11, Execution::available(), f);
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(k, (i, _))| k as u64 == *i));
    }
}
