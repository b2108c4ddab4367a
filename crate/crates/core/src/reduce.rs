//! Deterministic reductions over index ranges.
//!
//! Work is split into fixed-size chunks regardless of the thread count, and
//! chunk results are merged in index order, so serial and parallel runs
//! produce bit-identical floats.

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// How chunked work is scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecPolicy {
    Serial,
    Parallel,
}

impl Default for ExecPolicy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecPolicy::Parallel
        } else {
            ExecPolicy::Serial
        }
    }
}

/// Maps `work` over `[0, n)` in chunks of `chunk` indices and folds the
/// chunk results left to right with `merge`.
pub fn chunked<T, W, M>(policy: ExecPolicy, n: usize, chunk: usize, work: W, merge: M) -> Option<T>
where
    T: Send,
    W: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    M: Fn(T, T) -> T,
{
    let chunk = chunk.max(1);
    let ranges: Vec<std::ops::Range<usize>> =
        (0..n).step_by(chunk).map(|s| s..(s + chunk).min(n)).collect();
    let parts: Vec<T> = run(policy, ranges, &work);
    parts.into_iter().reduce(merge)
}

/// Applies `work` to each item, preserving input order in the output.
pub fn map_ordered<I, T, W>(policy: ExecPolicy, items: Vec<I>, work: W) -> Vec<T>
where
    I: Send,
    T: Send,
    W: Fn(I) -> T + Sync + Send,
{
    run(policy, items, &work)
}

#[cfg(feature = "parallel")]
fn run<I, T, W>(policy: ExecPolicy, items: Vec<I>, work: &W) -> Vec<T>
where
    I: Send,
    T: Send,
    W: Fn(I) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match policy {
        ExecPolicy::Parallel if items.len() > 1 => items.into_par_iter().map(work).collect(),
        _ => items.into_iter().map(work).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run<I, T, W>(_policy: ExecPolicy, items: Vec<I>, work: &W) -> Vec<T>
where
    I: Send,
    T: Send,
    W: Fn(I) -> T + Sync + Send,
{
    items.into_iter().map(work).collect()
}
