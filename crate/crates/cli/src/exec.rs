use std::num::NonZeroUsize;
use std::thread;

use nsga_pinn_core::trainer::Executor;

pub const THREADS_ENV: &str = "NSGA_PINN_THREADS";

/// Splits work into contiguous chunks over scoped threads; results keep
/// item order, so output never depends on the thread count.
#[derive(Debug, Clone, Copy)]
pub struct Threads {
    workers: NonZeroUsize,
}

impl Threads {
    pub fn new(workers: usize) -> Self {
        let workers = NonZeroUsize::new(workers).unwrap_or_else(available);
        Self { workers }
    }

    /// Worker count from the environment; unset, empty or `0` means one per
    /// available core.
    pub fn from_env() -> Self {
        let n = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .unwrap_or(0);
        Self::new(n)
    }

    pub fn workers(&self) -> usize {
        self.workers.get()
    }
}

fn available() -> NonZeroUsize {
    thread::available_parallelism().unwrap_or(NonZeroUsize::MIN)
}

impl Executor for Threads {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync,
    {
        let workers = self.workers.get().min(items.len());
        if workers <= 1 {
            return items.iter().map(f).collect();
        }
        let chunk = items.len().div_ceil(workers);
        let f = &f;
        thread::scope(|s| {
            let handles: Vec<_> = items
                .chunks(chunk)
                .map(|part| s.spawn(move || part.iter().map(f).collect::<Vec<R>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    }
}
