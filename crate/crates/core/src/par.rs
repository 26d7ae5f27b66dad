//! Execution policy for the data-parallel loops (subset enumeration, corpus
//! sweeps, doubling steps). Every parallel path produces exactly the same
//! result as its sequential counterpart; reductions are order-independent or
//! merged in index order.

use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses rayon's global pool when the `parallel` feature is enabled and
    /// silently degrades to sequential execution otherwise.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Maps `f` over `range`, returning results in index order.
pub fn map_range<T, F>(exec: Exec, range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec;
    range.map(f).collect()
}

/// Splits `0..len` into contiguous chunks of at most `chunk` items.
pub(crate) fn chunks(len: usize, chunk: usize) -> Vec<Range<usize>> {
    let chunk = chunk.max(1);
    (0..len.div_ceil(chunk))
        .map(|k| k * chunk..((k + 1) * chunk).min(len))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_agree() {
        let a = map_range(Exec::Sequential, 0..1000, |i| i * i);
        let b = map_range(Exec::Parallel, 0..1000, |i| i * i);
        assert_eq!(a, b);
    }

    #[test]
    fn chunks_cover_range() {
        let c = chunks(10, 4);
        assert_eq!(c, vec![0..4, 4..8, 8..10]);
        assert!(chunks(0, 4).is_empty());
    }
}
