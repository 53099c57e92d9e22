//! Data-parallel execution helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers run on rayon; without
//! it they degrade to plain iterators with the same chunking, so results are
//! bit-identical across both modes and across thread counts: every chunk is
//! reduced sequentially in index order and chunk results are folded in a
//! fixed order.

use num_complex::Complex64;

use crate::util::KahanComplex;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) const CHUNK: usize = 1024;

/// Maps `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub(crate) fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Maps `f` over `items`, preserving order.
#[cfg(not(feature = "parallel"))]
pub(crate) fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

fn chunk_ranges(len: usize) -> Vec<(usize, usize)> {
    (0..len)
        .step_by(CHUNK)
        .map(|start| (start, usize::min(start + CHUNK, len)))
        .collect()
}

/// Deterministic compensated complex sum of `term(i)` for `i` in `0..len`.
pub(crate) fn indexed_sum_complex<F>(len: usize, term: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    let partials = map_collect(&chunk_ranges(len), |&(a, b)| {
        let mut acc = KahanComplex::new();
        for i in a..b {
            acc.add(term(i));
        }
        acc.value()
    });
    let mut total = KahanComplex::new();
    for p in partials {
        total.add(p);
    }
    total.value()
}
