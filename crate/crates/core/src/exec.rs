//! Execution strategy for the data-parallel loops.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] fans work out
//! over the rayon pool; without it every loop runs sequentially. Both paths
//! produce identical results because randomness is addressed by index, never
//! by the thread that happens to run it.

/// How a batch workload is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Maps `f` over `0..len`, preserving index order in the output.
    pub fn map_indexed<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    /// Like [`Execution::map_indexed`] for fallible closures; the error of
    /// the smallest failing index wins.
    pub fn try_map_indexed<T, E, F>(self, len: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map_indexed(len, f).into_iter().collect()
    }

    /// Splits `0..len` into contiguous chunks of `chunk` items, maps each
    /// chunk range with `f` and concatenates the outputs in index order.
    /// Lets a worker reuse scratch buffers across the items of one chunk.
    pub fn map_chunks<T, F>(self, len: usize, chunk: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(std::ops::Range<usize>) -> Vec<T> + Sync + Send,
    {
        let chunk = chunk.max(1);
        let parts = self.map_indexed(len.div_ceil(chunk), |c| f(c * chunk..((c + 1) * chunk).min(len)));
        parts.into_iter().flatten().collect()
    }

    /// Worker threads available to this strategy.
    pub fn threads(self) -> usize {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => rayon::current_num_threads(),
            _ => 1,
        }
    }

    /// True when this strategy actually runs on more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}
