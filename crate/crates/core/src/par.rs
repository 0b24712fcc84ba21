//! Data-parallel map over index ranges.
//!
//! With the `parallel` feature (default) the maps run on the rayon global
//! pool; without it they run sequentially in index order. Results are always
//! returned in index order, so output does not depend on the backend.

/// Name of the compiled-in backend.
#[cfg(feature = "parallel")]
pub const BACKEND: &str = "rayon";
#[cfg(not(feature = "parallel"))]
pub const BACKEND: &str = "sequential";

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(i)` for `i in 0..n`.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Fallible variant of [`map_range`]; on failure one of the errors is
/// returned (the lowest failing index in sequential mode).
pub fn try_map_range<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Runs `f` with the sequential code path regardless of the feature set.
///
/// With rayon this installs a single-thread pool; it exists so benchmarks can
/// compare both execution modes within one build.
pub fn sequential<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(1).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        f()
    }
}
