//! Data-parallel helpers; sequential when the `parallel` feature is off.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `items.iter().map(f).collect()`, in parallel when enabled. Output order
/// always follows input order.
#[cfg(feature = "parallel")]
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Parallel sum with a fixed reduction tree, so the result does not depend on
/// the number of threads.
pub fn sum(items: &[f64]) -> f64 {
    if items.len() <= 64 {
        return items.iter().sum();
    }
    let mid = items.len() / 2;
    #[cfg(feature = "parallel")]
    {
        let (a, b) = rayon::join(|| sum(&items[..mid]), || sum(&items[mid..]));
        a + b
    }
    #[cfg(not(feature = "parallel"))]
    {
        sum(&items[..mid]) + sum(&items[mid..])
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Caps the global worker pool at `CARATHEDYN_THREADS` if set. Returns the
/// cap that was applied.
pub fn init_from_env() -> Result<Option<usize>, String> {
    let Ok(raw) = std::env::var("CARATHEDYN_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("CARATHEDYN_THREADS must be a positive integer, got {raw:?}"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())?;
    Ok(Some(n))
}
