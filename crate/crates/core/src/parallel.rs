//! Worker pool sizing shared by sweeps and Monte Carlo sampling.

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "URGP_THREADS";

/// Worker count from `URGP_THREADS`, falling back to the hardware default.
pub fn worker_count() -> usize {
    let hardware = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0).unwrap_or(hardware)
}

/// Runs `f` inside a pool of [`worker_count`] threads.
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
