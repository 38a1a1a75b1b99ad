//! Data-parallel helpers. With the `parallel` feature these dispatch to rayon,
//! otherwise they run the same closures sequentially. Every helper preserves
//! input order in its output, so results are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Rows per rayon task for row-wise kernels. Smaller systems stay sequential.
pub const MIN_PAR_ROWS: usize = 2048;

/// Map `f` over `items`, keeping order.
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

/// Fill `out[i] = f(i)` for every index, in parallel chunks of at least
/// `min_len` when enabled.
pub fn fill_indexed<F>(out: &mut [f64], min_len: usize, f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if out.len() >= min_len {
            out.par_iter_mut()
                .with_min_len(min_len)
                .enumerate()
                .for_each(|(i, o)| *o = f(i));
            return;
        }
    }
    let _ = min_len;
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
