//! Optional fan-out of independent restarts over a rayon pool.

use rayon::prelude::*;

pub const THREADS_ENV: &str = "ENTANGLECONE_THREADS";

/// Number of worker threads; zero runs everything on the calling thread.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Parallelism {
    pub threads: usize,
}

impl Parallelism {
    pub fn serial() -> Self {
        Self { threads: 0 }
    }

    pub fn threads(threads: usize) -> Self {
        Self { threads }
    }

    /// Reads `ENTANGLECONE_THREADS`; unset or unparsable means serial.
    pub fn from_env() -> Self {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(0);
        Self { threads }
    }

    /// `(0..count).map(f)` with results in index order regardless of scheduling.
    pub fn map_indices<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.threads == 0 || count <= 1 {
            return (0..count).map(f).collect();
        }
        match rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
        {
            Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
            Err(err) => {
                log::warn!("could not build thread pool ({err}); running serially");
                (0..count).map(f).collect()
            }
        }
    }
}
