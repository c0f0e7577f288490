//! Minimal deterministic work queue used by the fidelity average and the
//! parameter sweep: items are claimed off an atomic counter by a fixed
//! number of scoped threads and results land in their slot by index, so
//! the merged output is identical for any worker count.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};

/// Resolve a requested worker count: 0 means "use available parallelism".
pub(crate) fn resolve_workers(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    }
}

/// Run `job` for indices `0..count` on `workers` threads and return the
/// results in index order. The first error aborts remaining work.
pub(crate) fn run_indexed<T, F>(count: usize, workers: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let workers = resolve_workers(workers).min(count.max(1));
    let mut slots: Vec<Option<T>> = Vec::with_capacity(count);
    slots.resize_with(count, || None);
    let slots = Mutex::new(slots);
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let first_error: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if failed.load(Ordering::Relaxed) {
                    return;
                }
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= count {
                    return;
                }
                match job(index) {
                    Ok(value) => {
                        slots.lock().unwrap()[index] = Some(value);
                    }
                    Err(e) => {
                        let mut slot = first_error.lock().unwrap();
                        if slot.is_none() {
                            *slot = Some(e);
                        }
                        failed.store(true, Ordering::Relaxed);
                        return;
                    }
                }
            });
        }
    });

    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    let slots = slots.into_inner().unwrap();
    Ok(slots
        .into_iter()
        .map(|s| s.expect("all slots filled on success"))
        .collect())
}

/// Compensated (Kahan) sum over an ordered slice; scheduling-independent
/// because the inputs arrive already ordered.
pub(crate) fn kahan_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    let mut count = 0usize;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
        count += 1;
    }
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}
