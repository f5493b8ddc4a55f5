//! Execution strategy for the data-parallel loops (symbol simulation,
//! parameter sweeps, Monte Carlo repetitions).
//!
//! With the `parallel` feature disabled, [`Execution::Parallel`] silently
//! runs sequentially. Results are always returned in index order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `true` when this build can actually run work on a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Build `f(0), f(1), ..., f(n-1)`.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Map over a slice, preserving order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Fallible variant of [`Execution::map_slice`]; the first error in index
    /// order is returned.
    pub fn try_map_slice<S, T, E, F>(self, items: &[S], f: F) -> Result<Vec<T>, E>
    where
        S: Sync,
        T: Send,
        E: Send,
        F: Fn(&S) -> Result<T, E> + Sync + Send,
    {
        self.map_slice(items, f).into_iter().collect()
    }
}
