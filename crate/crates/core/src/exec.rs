//! Sequential / data-parallel execution switch.
//!
//! Reductions use a fixed chunk layout in both modes, so a parallel run is
//! bit-identical to a sequential one.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for deterministic reductions.
const CHUNK: usize = 512;

/// Below this many products a reduction always runs inline.
const PAR_MIN_LEN: usize = 4 * CHUNK;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is on; otherwise identical to
    /// `Sequential`.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Order-preserving map.
pub(crate) fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// `Σ_{k=lo}^{n} (w1[n-k]·f[k], w2[n-k]·f[k])`: the two history convolutions
/// of a predictor-corrector step, evaluated together.
pub(crate) fn history_sums(
    exec: Execution,
    w1: &[f64],
    w2: &[f64],
    f: &[f64],
    lo: usize,
    n: usize,
) -> (f64, f64) {
    if lo > n {
        return (0.0, 0.0);
    }
    let chunk_sum = |start: usize| {
        let end = (start + CHUNK).min(n + 1);
        let mut a = 0.0;
        let mut b = 0.0;
        for (k, fk) in (start..end).zip(&f[start..end]) {
            let d = n - k;
            a += w1[d] * fk;
            b += w2[d] * fk;
        }
        (a, b)
    };
    let starts = (lo..=n).step_by(CHUNK);

    #[cfg(feature = "parallel")]
    if exec.is_parallel() && n + 1 - lo >= PAR_MIN_LEN {
        let starts: Vec<usize> = starts.collect();
        let partial: Vec<(f64, f64)> = starts.par_iter().map(|&s| chunk_sum(s)).collect();
        return partial.into_iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    }
    let _ = (exec, PAR_MIN_LEN);
    starts.map(chunk_sum).fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1))
}
