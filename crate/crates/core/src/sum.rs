//! Compensated summation with a fixed reduction tree.
//!
//! Parallel reductions split the input into chunks of [`CHUNK`] elements
//! regardless of the worker count, sum each chunk with Neumaier compensation,
//! and fold the chunk partials left to right. The result is therefore
//! bit-identical for any rayon pool size.

use rayon::prelude::*;

pub const CHUNK: usize = 4096;

/// Neumaier running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
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

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Compensated {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Compensated::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Sequential compensated sum.
pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<Compensated>().value()
}

/// Deterministic parallel sum of `term(i)` for `i in 0..len`.
pub fn par_sum_by<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let n_chunks = len.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(len);
            (start..end).map(&term).collect::<Compensated>().value()
        })
        .collect();
    sum(partials)
}

/// Deterministic parallel dot product.
pub fn par_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    par_sum_by(a.len(), |i| a[i] * b[i])
}
