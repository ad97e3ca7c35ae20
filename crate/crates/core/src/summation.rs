//! Compensated and pairwise summation with a thread-count independent
//! reduction order.
//!
//! Long sums of nearly cancelling second differences are evaluated in fixed
//! chunks of [`CHUNK`] terms. Each chunk is accumulated with Neumaier's
//! compensated algorithm; the chunk partials are then combined by a balanced
//! binary tree. Chunk boundaries and the tree shape depend only on the number
//! of terms, so the result is bit-identical for any rayon pool size.

use rayon::prelude::*;

use crate::scalar::Scalar;

/// Terms per leaf of the reduction tree.
pub const CHUNK: usize = 4096;

/// Running Neumaier (improved Kahan–Babuška) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Merges another accumulator, keeping both compensation terms.
    #[inline]
    pub fn merge(mut self, other: Self) -> Self {
        self.add(other.sum);
        self.comp += other.comp;
        self
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Scalar> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

fn tree_reduce<T: Scalar>(mut parts: Vec<CompensatedSum<T>>) -> CompensatedSum<T> {
    if parts.is_empty() {
        return CompensatedSum::new();
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a.merge(b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

/// Pairwise sum of a slice with compensated leaves.
pub fn pairwise_sum<T: Scalar>(xs: &[T]) -> T {
    let parts: Vec<_> = xs
        .chunks(CHUNK)
        .map(|c| c.iter().copied().collect::<CompensatedSum<T>>())
        .collect();
    tree_reduce(parts).value()
}

/// Sums `term(i)` for `i in 0..n` in parallel with a deterministic order.
pub fn par_sum_indexed<T, F>(n: usize, term: F) -> T
where
    T: Scalar,
    F: Fn(usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<CompensatedSum<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            (lo..hi).map(&term).collect()
        })
        .collect();
    tree_reduce(parts).value()
}

/// Like [`par_sum_indexed`] but also returns `Σ |term(i)|`, which bounds the
/// accumulated rounding error.
pub fn par_sum_abs_indexed<T, F>(n: usize, term: F) -> (T, T)
where
    T: Scalar,
    F: Fn(usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<(CompensatedSum<T>, CompensatedSum<T>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut s = CompensatedSum::new();
            let mut a = CompensatedSum::new();
            for i in lo..hi {
                let t = term(i);
                s.add(t);
                a.add(t.abs());
            }
            (s, a)
        })
        .collect();
    let (s, a): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    (tree_reduce(s).value(), tree_reduce(a).value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_recovers_cancelled_mass() {
        let xs = [1.0e16, 1.0, -1.0e16, 1.0];
        let naive: f64 = xs.iter().sum();
        assert_eq!(naive, 1.0);
        assert_eq!(pairwise_sum(&xs), 2.0);
    }

    #[test]
    fn parallel_sum_is_thread_count_independent() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| par_sum_indexed(100_003, f));
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| par_sum_indexed(100_003, f));
        assert_eq!(one.to_bits(), four.to_bits());
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(par_sum_indexed::<f64, _>(0, |_| 1.0), 0.0);
        assert_eq!(pairwise_sum::<f32>(&[]), 0.0);
    }
}
