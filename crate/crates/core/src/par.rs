//! Data-parallel helpers. With the `parallel` feature the closures run on the
//! current rayon pool; without it they run sequentially. Outputs are collected
//! in index order either way, so reductions over them are reproducible.

use crate::error::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether the crate was built with rayon support.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// `(0..n).map(f)` collected in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
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

/// Like [`map_indexed`], returning the lowest-index error if any item fails.
pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indexed(n, f).into_iter().collect()
}

/// Applies `f` to every element with its index.
pub fn try_for_each_mut<T, F>(items: &mut [T], f: F) -> Result<()>
where
    T: Send,
    F: Fn(usize, &mut T) -> Result<()> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    let results: Vec<Result<()>> = items.par_iter_mut().enumerate().map(|(i, x)| f(i, x)).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<()>> = items.iter_mut().enumerate().map(|(i, x)| f(i, x)).collect();
    results.into_iter().collect()
}

/// Runs `f` with at most `workers` threads (`None` keeps the global pool).
pub fn with_workers<R, F>(workers: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match workers {
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
            None => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}
