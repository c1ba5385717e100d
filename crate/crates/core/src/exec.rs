//! Execution policy for the data-parallel loops.
//!
//! With the `parallel` feature (default) the block loops run on the rayon
//! pool; without it, or with [`Execution::Sequential`], they run in order on
//! the calling thread. Results are identical either way: work is split into
//! fixed-size blocks whose random streams are keyed by block index.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run work in parallel.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Maps `f` over `0..n`, returning results in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Maps `f` over a slice, returning results in input order.
pub fn map_slice<I, T, F>(exec: Execution, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Splits `0..len` into `(start, end)` blocks of at most `block` elements.
pub fn blocks(len: usize, block: usize) -> Vec<(usize, usize)> {
    assert!(block > 0, "block size must be positive");
    (0..len)
        .step_by(block)
        .map(|s| (s, (s + block).min(len)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_cover_range() {
        assert_eq!(blocks(0, 4), vec![]);
        assert_eq!(blocks(10, 4), vec![(0, 4), (4, 8), (8, 10)]);
        assert_eq!(blocks(8, 4), vec![(0, 4), (4, 8)]);
    }

    #[test]
    fn policies_agree() {
        let f = |i: usize| (i * i) as u64;
        assert_eq!(
            map_indexed(Execution::Sequential, 1000, f),
            map_indexed(Execution::Parallel, 1000, f)
        );
    }
}
