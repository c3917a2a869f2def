//! Richardson extrapolation for sequences with an asymptotic expansion in `1/n`.

use std::ops::{Add, Mul, Sub};

/// Second-order Richardson step from samples at `k`, `k/2` and `k/4`.
///
/// Removes the `1/k` and `1/k²` terms of `x_k = x + a/k + b/k² + …`.
pub fn richardson2<T>(at_k: T, at_half: T, at_quarter: T) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    (at_k * 8.0 - at_half * 6.0 + at_quarter) * (1.0 / 3.0)
}

/// Accelerated value of `seq` at index `k`; `k` must be a positive multiple of 4
/// inside the sequence.
pub fn richardson_at<T>(seq: &[T], k: usize) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    debug_assert!(k >= 4 && k % 4 == 0 && k < seq.len());
    richardson2(seq[k], seq[k / 2], seq[k / 4])
}

/// Largest multiple of 4 that is `<= n`.
pub fn floor4(n: usize) -> usize {
    n - n % 4
}

/// Accelerated values at every multiple of 4 in `[lo, hi]`.
pub fn richardson_window<T>(seq: &[T], lo: usize, hi: usize) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let start = (lo.max(4) + 3) / 4 * 4;
    (start..=floor4(hi)).step_by(4).map(|k| richardson_at(seq, k)).collect()
}
