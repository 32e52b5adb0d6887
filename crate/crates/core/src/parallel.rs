//! Worker-count control. All parallel reductions in this crate combine
//! partial results in a fixed order, so outputs do not depend on `workers`.

use crate::{Error, Result};

/// Runs `f` inside a dedicated rayon pool with `workers` threads.
/// `None` uses the global pool (one thread per available core).
pub fn with_workers<T, F>(workers: Option<usize>, f: F) -> Result<T>
where
    F: FnOnce() -> T + Send,
    T: Send,
{
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidParameter("worker count must be at least 1".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
