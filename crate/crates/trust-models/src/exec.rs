//! Data-parallel inner loops with a sequential fallback.
//!
//! Per-particle maps are embarrassingly parallel; with the `parallel` feature
//! (default) they run on rayon, otherwise on a plain iterator. Because every
//! particle draws from its own counter-based substream, both paths produce
//! bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over indexed elements of `xs`, collecting into a Vec.
pub fn map_indexed<T, U, F>(xs: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        xs.par_iter().enumerate().map(|(i, x)| f(i, x)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        xs.iter().enumerate().map(|(i, x)| f(i, x)).collect()
    }
}
