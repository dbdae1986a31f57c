//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the maps run on the rayon pool; without it
//! (or with [`Exec::Sequential`]) they run in index order on the caller's
//! thread. Results always come back in index order, so reductions done by
//! the caller are deterministic either way.

/// Execution policy for the sweep helpers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    /// Use the rayon pool when the `parallel` feature is compiled in.
    #[default]
    Parallel,
    /// Plain sequential loop.
    Sequential,
}

/// Maps `f` over `0..n` and collects the results in index order.
pub fn map_indexed<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Maps `f` over a slice and collects the results in order.
pub fn map_slice<S, T, F>(exec: Exec, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(exec, items.len(), |i| f(&items[i]))
}

/// True when the crate was built with rayon support.
pub fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}

/// Caps the global pool at `threads` workers. Only the first call has an
/// effect; later calls and builds without rayon return `false`.
pub fn init_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

/// Reads `CALIBRA_THREADS` and applies it via [`init_threads`].
pub fn init_from_env() -> Option<usize> {
    let n = std::env::var("CALIBRA_THREADS").ok()?.trim().parse::<usize>().ok()?;
    init_threads(n);
    Some(n)
}
