//! Data-parallel kernels with a sequential fallback.
//!
//! With the `parallel` feature the kernels dispatch to rayon unless the
//! process-wide mode is switched to [`Execution::Sequential`] (benches compare
//! the two). Reductions always use fixed-size chunks summed in index order,
//! so both modes produce bitwise-identical results.

use std::sync::atomic::{AtomicU8, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for reductions and elementwise work.
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

static MODE: AtomicU8 = AtomicU8::new(1);

/// Selects the execution mode. Without the `parallel` feature this is a no-op.
pub fn set_execution(mode: Execution) {
    MODE.store(matches!(mode, Execution::Parallel) as u8, Ordering::Relaxed);
}

pub fn execution() -> Execution {
    if cfg!(feature = "parallel") && MODE.load(Ordering::Relaxed) == 1 {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

#[cfg(feature = "parallel")]
#[inline]
fn parallel_for(len: usize) -> bool {
    execution() == Execution::Parallel && len > CHUNK
}

/// Applies `f(index, &mut item)` to every element.
pub fn for_each_indexed<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel_for(data.len()) {
        data.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                let base = c * CHUNK;
                for (i, x) in chunk.iter_mut().enumerate() {
                    f(base + i, x);
                }
            });
        return;
    }
    for (i, x) in data.iter_mut().enumerate() {
        f(i, x);
    }
}

/// Applies `f(chunk_index, chunk)` to consecutive chunks of length `len`.
/// `init` builds per-worker scratch space.
pub fn for_each_chunk<T, S, I, F>(data: &mut [T], len: usize, init: I, f: F)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution() == Execution::Parallel && data.len() / len.max(1) > 1 {
        data.par_chunks_mut(len)
            .enumerate()
            .for_each_init(&init, |s, (i, c)| f(s, i, c));
        return;
    }
    let mut scratch = init();
    for (i, c) in data.chunks_mut(len).enumerate() {
        f(&mut scratch, i, c);
    }
}

/// Builds a vector from `f(index)`.
pub fn collect<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send + Clone + Default,
    F: Fn(usize) -> T + Sync + Send,
{
    let mut out = vec![T::default(); len];
    for_each_indexed(&mut out, |i, x| *x = f(i));
    out
}

/// Deterministic sum of `f(i)` over `0..len`.
pub fn sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = len.div_ceil(CHUNK);
    let partial = |c: usize| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(len);
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    };
    #[cfg(feature = "parallel")]
    if parallel_for(len) {
        let parts: Vec<f64> = (0..chunks).into_par_iter().map(partial).collect();
        return parts.iter().sum();
    }
    let mut total = 0.0;
    for c in 0..chunks {
        total += partial(c);
    }
    total
}

/// Maximum of `f(i)` over `0..len` (0 for empty input).
pub fn max<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = len.div_ceil(CHUNK);
    let partial = |c: usize| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(len);
        (lo..hi).map(&f).fold(0.0_f64, f64::max)
    };
    #[cfg(feature = "parallel")]
    if parallel_for(len) {
        return (0..chunks)
            .into_par_iter()
            .map(partial)
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, f64::max);
    }
    (0..chunks).map(partial).fold(0.0, f64::max)
}

/// Maps `f` over independent jobs, preserving order.
pub fn map_jobs<T, R, F>(jobs: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution() == Execution::Parallel {
        return jobs.into_par_iter().map(f).collect();
    }
    jobs.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_is_mode_independent() {
        let f = |i: usize| ((i as f64) * 0.37).sin() * 1e3 + 1e-7 * i as f64;
        let n = 100_003;
        set_execution(Execution::Sequential);
        let a = sum(n, f);
        set_execution(Execution::Parallel);
        let b = sum(n, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn max_and_collect() {
        let v = collect(10_000, |i| i as f64);
        assert_eq!(v[9_999], 9_999.0);
        assert_eq!(max(10_000, |i| v[i]), 9_999.0);
        assert_eq!(max(0, |_| 1.0), 0.0);
    }
}
