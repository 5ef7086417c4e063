//! Data-parallel map with a sequential fallback.
//!
//! Grid quadrature, per-fiber solves and solver restarts are all maps of a
//! pure function over an indexed slice. With the `parallel` feature (default)
//! they run on the rayon thread pool; without it the same code paths run
//! sequentially. Results are always collected **in input order** and reduced
//! sequentially afterwards, so sums and reports are bit-identical run to run
//! and independent of the number of worker threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving order of results.
pub fn map_slice<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Map `f` over indices `0..len`, preserving order of results.
pub fn map_indices<R: Send>(len: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Sequential map with the same signature as [`map_slice`]; used by the
/// benchmark suite to compare the two execution modes within one build.
pub fn map_slice_seq<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Sequential map over indices; counterpart of [`map_indices`].
pub fn map_indices_seq<R>(len: usize, f: impl Fn(usize) -> R) -> Vec<R> {
    (0..len).map(f).collect()
}

/// Fixed-order sum of already-computed terms. Always sequential: a parallel
/// reduction would re-associate floating point addition and break
/// reproducibility across thread counts.
pub fn ordered_sum(terms: &[f64]) -> f64 {
    terms.iter().sum()
}
