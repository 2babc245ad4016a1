//! Data-parallel helpers with a sequential fallback.
//!
//! Results never depend on the number of worker threads: maps preserve
//! input order and reductions use an associative, commutative selection.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Order-preserving map over a slice.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Order-preserving map over `0..len`.
pub fn map_range<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
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

/// Sum of `f(i)` over `0..len`, accumulated in fixed-size chunks so the
/// result is identical with or without threads.
pub fn sum_range<F>(len: usize, chunk: usize, f: F) -> u64
where
    F: Fn(usize) -> u64 + Sync + Send,
{
    let chunk = chunk.max(1);
    let chunks = len.div_ceil(chunk);
    let partial = map_range(chunks, |c| {
        let start = c * chunk;
        let end = (start + chunk).min(len);
        (start..end).map(&f).sum::<u64>()
    });
    partial.into_iter().sum()
}

/// Selects the best candidate under a total order `better(a, b)`.
///
/// `better` must be a strict total order so the winner is independent of
/// evaluation order.
pub fn select_best<T, F>(items: Vec<T>, better: F) -> Option<T>
where
    T: Send,
    F: Fn(&T, &T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items
            .into_par_iter()
            .reduce_with(|a, b| if better(&b, &a) { b } else { a })
    }
    #[cfg(not(feature = "parallel"))]
    {
        items
            .into_iter()
            .reduce(|a, b| if better(&b, &a) { b } else { a })
    }
}
