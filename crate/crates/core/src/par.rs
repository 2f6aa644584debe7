//! Thin switch between rayon-backed and sequential mapping.
//!
//! Parallelism is gated twice: the `parallel` cargo feature compiles the rayon
//! path in, and the runtime flag (from `Config::parallel`) selects it per
//! call. Results are collected in input order either way, so output is
//! identical across all four combinations.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn maybe_par_map<T, R, F>(parallel: bool, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if parallel && items.len() > 1 {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn maybe_par_map<T, R, F>(_parallel: bool, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}
