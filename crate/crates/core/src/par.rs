//! Execution backend selection.
//!
//! Hot loops (all-sources shortest paths, replicate batches, pair scans) go
//! through [`map_range`] / [`map_slice`]. With the `parallel` feature they run
//! on the rayon pool; without it, or when [`Exec::Sequential`] is requested,
//! they run on the calling thread. Output order is the input order in both
//! cases, so results do not depend on the backend.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Rayon pool when compiled with `parallel`, otherwise sequential.
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

pub fn map_range<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

pub fn map_slice<S, T, F>(exec: Exec, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Configure the global pool. No-op without the `parallel` feature.
pub fn init_threads(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(threads) = threads {
            builder = builder.num_threads(threads);
        }
        // Fails if the pool was already built; that pool is kept.
        let _ = builder.build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}
