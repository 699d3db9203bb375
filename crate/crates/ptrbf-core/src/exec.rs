//! Execution strategy for data-parallel loops.
//!
//! Every parallel site in the crate maps independent work items to a `Vec`
//! in index order and reduces sequentially afterwards, so the parallel and
//! sequential paths produce bit-identical results. `indexed_map` dispatches
//! on the `parallel` feature; `indexed_map_seq` is always available for
//! benchmarks and comparison tests.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    indexed_map_seq(n, f)
}

/// Sequential twin of [`indexed_map`].
pub fn indexed_map_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let a = indexed_map(100, |i| i * i);
        let b = indexed_map_seq(100, |i| i * i);
        assert_eq!(a, b);
    }
}
