use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::error::{CliError, CliResult};

pub const WORKERS_ENV: &str = "JAGG_WORKERS";

/// Worker count from the environment override, else the config; 0 means
/// one per available core.
pub fn worker_count(configured: usize) -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(configured)
}

pub fn build_pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))
}

/// Maps `f` over `items` on the current pool. Results keep item order.
pub fn par_map<T, R, F>(label: &str, items: &[T], progress: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let done = AtomicUsize::new(0);
    let total = items.len();
    items
        .par_iter()
        .map(|item| {
            let r = f(item);
            let k = done.fetch_add(1, Ordering::Relaxed) + 1;
            if progress {
                eprintln!("[{label}] {k}/{total}");
            }
            r
        })
        .collect()
}
