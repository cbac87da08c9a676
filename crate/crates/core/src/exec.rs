//! Execution strategy for the data-parallel loops.
//!
//! Every hot loop in the crate (per-pixel maps, per-detection box scans,
//! per-combination fault injection) goes through [`Execution`]. With the
//! `parallel` feature enabled the default is [`Execution::Parallel`], backed
//! by rayon; without it, `Parallel` silently degrades to the sequential path
//! so callers never need their own `cfg` gates. Results are identical either
//! way: parallel maps preserve input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Pixel maps over fewer elements than this run sequentially even in
/// parallel mode.
#[cfg_attr(not(feature = "parallel"), allow(dead_code))]
const MIN_PARALLEL_PIXELS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether this build can actually run work on multiple threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub(crate) fn map_pixels<F>(self, src: &[u8], f: F) -> Vec<u8>
    where
        F: Fn(u8) -> u8 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && src.len() >= MIN_PARALLEL_PIXELS {
            return src.par_iter().map(|&v| f(v)).collect();
        }
        src.iter().map(|&v| f(v)).collect()
    }

    pub(crate) fn zip_pixels<F>(self, a: &[u8], b: &[u8], f: F) -> Vec<u8>
    where
        F: Fn(u8, u8) -> u8 + Sync + Send,
    {
        debug_assert_eq!(a.len(), b.len());
        #[cfg(feature = "parallel")]
        if self.is_parallel() && a.len() >= MIN_PARALLEL_PIXELS {
            return a.par_iter().zip(b.par_iter()).map(|(&x, &y)| f(x, y)).collect();
        }
        a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
    }

    pub(crate) fn sum_pixels(self, src: &[u8]) -> u64 {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && src.len() >= MIN_PARALLEL_PIXELS {
            return src.par_iter().map(|&v| u64::from(v)).sum();
        }
        src.iter().map(|&v| u64::from(v)).sum()
    }

    /// Order-preserving map over a slice of independent work items.
    pub(crate) fn map_items<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && items.len() > 1 {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}
