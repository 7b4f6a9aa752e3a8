//! Deterministic reductions.
//!
//! Every reduction in the crate goes through [`pairwise_sum`], whose
//! association order depends only on the slice length. Parallel producers
//! fill a buffer first and reduce afterwards, so serial and parallel runs
//! agree bitwise.

const BLOCK: usize = 16;

/// Pairwise (cascade) summation with a fixed split point at `len / 2`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..n`, materialized in blocks.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(n: usize, f: F) -> f64 {
    let buf: Vec<f64> = (0..n).map(f).collect();
    pairwise_sum(&buf)
}

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(samples: &[f64], dt: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => {
            let inner = pairwise_sum(&samples[1..n - 1]);
            dt * (0.5 * samples[0] + inner + 0.5 * samples[n - 1])
        }
    }
}
