use rayon::prelude::*;

/// Work (in multiply-adds) below which rayon's dispatch overhead dominates.
pub(crate) const PAR_THRESHOLD: usize = 1 << 18;

/// `(0..count).map(f)`, in parallel when `parallel` is set.
pub(crate) fn map_range<R, F>(count: usize, parallel: bool, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    if parallel {
        (0..count).into_par_iter().map(f).collect()
    } else {
        (0..count).map(f).collect()
    }
}
