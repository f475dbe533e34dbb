//! Bounded parallelism helper.
//!
//! `QDIMRED_THREADS` caps worker threads; the default of 1 keeps every code
//! path sequential. Results are written to their input's slot, so the output
//! is identical bit-for-bit at any thread count.

use rayon::prelude::*;

use crate::error::Result;

/// Thread cap from the environment; unset, unparseable or zero means 1.
pub fn thread_cap() -> usize {
    std::env::var("QDIMRED_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// Map a fallible function over a slice, preserving order. Runs sequentially
/// unless the thread cap allows more.
pub fn map_indexed<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync,
{
    let cap = thread_cap().min(items.len().max(1));
    if cap <= 1 {
        return items.iter().map(&f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cap)
        .build()
        .map_err(|e| crate::error::Error::Numerical(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_agree() {
        let items: Vec<f64> = (0..64).map(|i| i as f64 * 0.37).collect();
        let seq: Vec<f64> = map_indexed(&items, |x| Ok(x.sin() * x.cos())).unwrap();
        std::env::set_var("QDIMRED_THREADS", "4");
        let par: Vec<f64> = map_indexed(&items, |x| Ok(x.sin() * x.cos())).unwrap();
        std::env::remove_var("QDIMRED_THREADS");
        assert_eq!(seq, par);
    }
}
