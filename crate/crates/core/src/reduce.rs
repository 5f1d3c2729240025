//! Deterministic summation.
//!
//! Index ranges are cut into fixed blocks of [`BLOCK`] terms. Each block is
//! summed by a pairwise tree, blocks are evaluated in parallel, and the
//! block totals are combined by another pairwise tree in index order. The
//! association of every floating-point addition depends only on the range
//! length, never on the number of worker threads.

use std::ops::Add;

use rayon::prelude::*;

pub const BLOCK: usize = 1024;

/// Pairwise (cascade) sum of a slice.
pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    match xs.len() {
        0 => T::default(),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let (lo, hi) = xs.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// `sum_{i < len} term(i)` with a thread-count independent reduction order.
pub fn sum_indexed<T, F>(len: u64, term: F) -> T
where
    T: Copy + Default + Send + Add<Output = T>,
    F: Fn(u64) -> T + Sync,
{
    sum_range(0, len, term)
}

/// `sum_{start <= i < end} term(i)`; the tree shape depends only on `end - start`.
pub fn sum_range<T, F>(start: u64, end: u64, term: F) -> T
where
    T: Copy + Default + Send + Add<Output = T>,
    F: Fn(u64) -> T + Sync,
{
    if end <= start {
        return T::default();
    }
    let len = end - start;
    let block = BLOCK as u64;
    let nblocks = len.div_ceil(block);
    let partials: Vec<T> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let lo = start + b * block;
            let hi = (lo + block).min(end);
            let mut buf = [T::default(); BLOCK];
            for (slot, i) in buf.iter_mut().zip(lo..hi) {
                *slot = term(i);
            }
            pairwise_sum(&buf[..(hi - lo) as usize])
        })
        .collect();
    pairwise_sum(&partials)
}
