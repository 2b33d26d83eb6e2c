//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature these run on the rayon pool; without it they
//! are plain loops. Results never depend on which path runs: outputs are
//! collected in index order and searches resolve to the lowest index.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..len).map(f)` collected in index order.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Lowest index in `0..len` for which `f` returns `Some`.
pub fn find_first<T, F>(len: u64, f: F) -> Option<(u64, T)>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len)
            .into_par_iter()
            .filter_map(|r| f(r).map(|t| (r, t)))
            .find_first(|_| true)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).find_map(|r| f(r).map(|t| (r, t)))
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
