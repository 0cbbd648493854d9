//! Order-preserving parallel map.
//!
//! With the `parallel` feature work runs on a rayon pool capped by the
//! `SOL_GEO_THREADS` environment variable; results always come back in index
//! order so any reduction over them is deterministic.

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "SOL_GEO_THREADS";

#[cfg(feature = "parallel")]
fn pool() -> Option<&'static rayon::ThreadPool> {
    use std::sync::OnceLock;
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()) {
            b = b.num_threads(n.max(1));
        }
        b.build().ok()
    })
    .as_ref()
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if n > 1 {
            if let Some(p) = pool() {
                return p.install(|| (0..n).into_par_iter().map(&f).collect());
            }
        }
    }
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn keeps_order() {
        let v = super::map_range(1000, |i| i * 3);
        assert!(v.iter().enumerate().all(|(i, x)| *x == 3 * i));
    }
}
