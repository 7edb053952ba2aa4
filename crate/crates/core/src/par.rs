//! Order-preserving map over replication indices.
//!
//! With the `parallel` feature (default) the work is spread over a rayon pool;
//! without it everything runs on the calling thread. Results always come back
//! in index order, so aggregation never depends on completion order.

use crate::error::{Error, Result};

pub fn map_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(n, f)
    }
}

/// [`map_indexed`] for fallible work; the first error by index wins.
pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indexed(n, f).into_iter().collect()
}

/// Runs `op` with at most `jobs` worker threads. `None` keeps the global pool.
pub fn with_jobs<R, F>(jobs: Option<usize>, op: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match jobs {
        Some(0) => Err(Error::Config("--jobs must be at least 1".into())),
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(op))
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => {
            log::debug!("built without the parallel feature; ignoring --jobs");
            Ok(op())
        }
        None => Ok(op()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let out = with_jobs(Some(3), || map_indexed(100, |i| i * i)).unwrap();
        assert_eq!(out, map_sequential(100, |i| i * i));
    }

    #[test]
    fn first_error_by_index() {
        let r: Result<Vec<usize>> = try_map_indexed(10, |i| {
            if i >= 4 {
                Err(Error::Contract(format!("{i}")))
            } else {
                Ok(i)
            }
        });
        match r {
            Err(Error::Contract(msg)) => assert_eq!(msg, "4"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_jobs_rejected() {
        assert!(matches!(with_jobs(Some(0), || ()), Err(Error::Config(_))));
    }
}
