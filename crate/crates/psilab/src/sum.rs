//! Compensated summation and the deterministic execution layer.
//!
//! Every heavy loop in the crate is expressed as a map over a fixed chunk
//! decomposition of an index range. The chunk size is part of the algorithm,
//! never derived from the thread count, and the per-chunk partial results are
//! merged sequentially in chunk order. Running the same computation with one
//! thread, eight threads, or with the `parallel` feature disabled therefore
//! produces bit-identical floating-point output.

use std::ops::Range;

/// Neumaier variant of Kahan summation.
///
/// Tracks a running compensation so that the returned total is the correctly
/// rounded sum for all but adversarial inputs. `merge` folds another
/// accumulator in through the same compensated path, which keeps chunked
/// reductions exactly equal to the sequential left-to-right sum of partials.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds `other` in as two ordinary additions (principal part, then
    /// compensation). Order matters; callers merge in ascending chunk order.
    #[inline]
    pub fn merge(&mut self, other: Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Left-to-right compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = Neumaier::new();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

/// Chunk size used by the reductions unless a caller has a structural reason
/// to pick its own. Large enough to amortize dispatch, small enough to load
/// balance on a handful of cores.
pub const DEFAULT_CHUNK: usize = 1 << 16;

/// Which executor drives a chunked map. The decomposition and merge order are
/// identical in both cases; only the scheduling of chunk bodies differs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Runs chunk bodies on the rayon pool. Falls back to sequential when the
    /// crate is built without the `parallel` feature.
    Parallel,
}

impl Execution {
    /// Parallel when compiled in, sequential otherwise.
    pub fn auto() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }

    /// Splits `0..n` into `ceil(n / chunk)` fixed ranges, applies `f` to each,
    /// and returns the per-chunk results in chunk order.
    pub fn map_chunks<T, F>(self, n: usize, chunk: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<usize>) -> T + Sync + Send,
    {
        assert!(chunk > 0, "chunk size must be positive");
        let ranges: Vec<Range<usize>> = (0..n)
            .step_by(chunk)
            .map(|lo| lo..(lo + chunk).min(n))
            .collect();
        match self {
            Execution::Sequential => ranges.into_iter().map(f).collect(),
            Execution::Parallel => run_parallel(ranges, f),
        }
    }

    /// Chunked compensated reduction: `f` produces a partial accumulator per
    /// chunk, partials are merged left to right.
    pub fn sum_chunks<F>(self, n: usize, chunk: usize, f: F) -> f64
    where
        F: Fn(Range<usize>) -> Neumaier + Sync + Send,
    {
        let mut acc = Neumaier::new();
        for part in self.map_chunks(n, chunk, f) {
            acc.merge(part);
        }
        acc.total()
    }
}

#[cfg(feature = "parallel")]
fn run_parallel<T, F>(ranges: Vec<Range<usize>>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    use rayon::prelude::*;
    ranges.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_parallel<T, F>(ranges: Vec<Range<usize>>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    ranges.into_iter().map(f).collect()
}

/// Sizes the global thread pool. Call once, before any parallel work; later
/// calls are ignored if a pool already exists (the pool size never affects
/// results, only wall-clock time).
pub fn init_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancellation() {
        // 1 + 1e100 - 1e100 collapses to 0 in naive f64; compensation keeps it.
        let mut acc = Neumaier::new();
        acc.add(1.0);
        acc.add(1e100);
        acc.add(-1e100);
        assert_eq!(acc.total(), 1.0);
    }

    #[test]
    fn compensated_harmonic_matches_reference() {
        // Sum of 1/k for k = 1..=10^6, reference from 30-digit arithmetic.
        let n = 1_000_000u64;
        let s = compensated_sum((1..=n).map(|k| 1.0 / k as f64));
        assert!((s - 14.392726722865723634).abs() < 1e-12);
    }

    #[test]
    fn chunked_reduction_is_identical_across_executors() {
        let n = 100_000usize;
        let term = |i: usize| ((i as f64) * 0.7).sin() / ((i + 1) as f64);
        let run = |exec: Execution| {
            exec.sum_chunks(n, 1 << 10, |r| {
                let mut acc = Neumaier::new();
                for i in r {
                    acc.add(term(i));
                }
                acc
            })
        };
        let seq = run(Execution::Sequential);
        let par = run(Execution::Parallel);
        assert_eq!(seq.to_bits(), par.to_bits());
    }

    #[test]
    fn chunk_decomposition_covers_range_once() {
        let parts = Execution::Sequential.map_chunks(10, 3, |r| r);
        assert_eq!(parts, vec![0..3, 3..6, 6..9, 9..10]);
    }

    #[test]
    fn merge_equals_flat_sum_of_partials() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sqrt() - 15.0).collect();
        let mut whole = Neumaier::new();
        for &x in &xs {
            whole.add(x);
        }
        let mut a = Neumaier::new();
        let mut b = Neumaier::new();
        for &x in &xs[..500] {
            a.add(x);
        }
        for &x in &xs[500..] {
            b.add(x);
        }
        let mut merged = a;
        merged.merge(b);
        assert!((merged.total() - whole.total()).abs() < 1e-12);
    }
}
