//! Convergence acceleration: averaged partial sums for alternating series
//! and polynomial (Richardson) extrapolation of boundary limits.

use std::ops::{Add, Mul, Sub};

use thiserror::Error;

/// Rounds of pairwise averaging applied to the final partial sums.
pub const AVERAGING_ROUNDS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SumError {
    #[error("series did not settle after {terms} terms (last change {change:e})")]
    NoConvergence { terms: usize, value: f64, change: f64 },
    #[error("series term {index} is not finite")]
    NonFinite { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summation {
    pub value: f64,
    pub error: f64,
    pub terms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for SumOptions {
    fn default() -> Self {
        SumOptions { rel_tol: 1e-14, abs_tol: 1e-300, max_terms: 1 << 20 }
    }
}

/// Collapses a run of partial sums by repeated pairwise averaging.
///
/// For an alternating tail with smoothly varying magnitudes each round
/// cancels most of the remaining oscillation (Euler's transform acting on
/// the tail).
pub fn repeated_average<T>(sums: &[T]) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    assert!(!sums.is_empty());
    let mut row: Vec<T> = sums.to_vec();
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = (row[i] + row[i + 1]) * 0.5;
        }
        row.pop();
    }
    row[0]
}

/// Sums `Σ_{n≥0} term(n)` for a series whose terms eventually alternate
/// (or decay geometrically).
///
/// Partial sums are collected in blocks of doubling length; the estimate at
/// each checkpoint is the repeated average of the last
/// `AVERAGING_ROUNDS + 1` partial sums, and the difference between
/// consecutive checkpoints is the error estimate.
pub fn averaged_sum<F: FnMut(usize) -> f64>(mut term: F, opts: SumOptions) -> Result<Summation, SumError> {
    let mut sums: Vec<f64> = Vec::with_capacity(64);
    let mut acc = 0.0;
    let mut checkpoint = 16usize;
    let mut previous: Option<f64> = None;
    let mut n = 0usize;
    loop {
        while n < checkpoint {
            let t = term(n);
            if !t.is_finite() {
                return Err(SumError::NonFinite { index: n });
            }
            acc += t;
            sums.push(acc);
            n += 1;
        }
        let estimate = repeated_average(&sums[sums.len() - (AVERAGING_ROUNDS + 1)..]);
        if let Some(prev) = previous {
            let change = (estimate - prev).abs();
            let tol = opts.abs_tol.max(opts.rel_tol * estimate.abs());
            if change <= tol {
                return Ok(Summation { value: estimate, error: change, terms: n });
            }
            if checkpoint >= opts.max_terms {
                return Err(SumError::NoConvergence { terms: n, value: estimate, change });
            }
        }
        previous = Some(estimate);
        checkpoint *= 2;
    }
}

/// Result of extrapolating a sequence `v(h_k)` to `h = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation<T> {
    pub value: T,
    /// Magnitude of the last correction applied.
    pub last_correction: f64,
    /// Magnitude of the first correction applied.
    pub first_correction: f64,
}

/// Polynomial extrapolation to `h = 0` by Neville's scheme (Richardson
/// extrapolation with integer exponents `1, 2, ...`).
///
/// `norm` maps a value to a magnitude so that complex sequences can be
/// extrapolated as well.
pub fn richardson<T, N>(h: &[f64], values: &[T], norm: N) -> Extrapolation<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    N: Fn(T) -> f64,
{
    assert_eq!(h.len(), values.len());
    assert!(!values.is_empty());
    let n = values.len();
    // table[i] holds P_{i..i+k}(0) after round k.
    let mut table: Vec<T> = values.to_vec();
    let mut diagonal = vec![values[n - 1]];
    for k in 1..n {
        for i in 0..n - k {
            let j = i + k;
            table[i] = (table[i + 1] * h[i] - table[i] * h[j]) * (1.0 / (h[i] - h[j]));
        }
        diagonal.push(table[n - 1 - k]);
    }
    let first = if n > 1 { norm(diagonal[1] - diagonal[0]) } else { 0.0 };
    let last = if n > 1 { norm(diagonal[n - 1] - diagonal[n - 2]) } else { 0.0 };
    Extrapolation { value: diagonal[n - 1], last_correction: last, first_correction: first }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn averaged_sum_log2() {
        // Σ (-1)^n / (n+1) = ln 2
        let s =
            averaged_sum(|n| if n % 2 == 0 { 1.0 } else { -1.0 } / (n as f64 + 1.0), SumOptions::default()).unwrap();
        assert!((s.value - 2f64.ln()).abs() < 1e-13, "{}", s.value);
        assert!(s.terms < 2000);
    }

    #[test]
    fn averaged_sum_abel_type_series() {
        // Σ (n+1)(-t)^n = 1/(1+t)^2 at t = 0.99
        let t: f64 = 0.99;
        let s = averaged_sum(|n| (n as f64 + 1.0) * (-t).powi(n as i32), SumOptions::default()).unwrap();
        assert!((s.value - 1.0 / (1.0 + t).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn averaged_sum_positive_geometric() {
        let s = averaged_sum(|n| 0.5f64.powi(n as i32), SumOptions::default()).unwrap();
        assert!((s.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn richardson_recovers_quadratic_limit() {
        let h = [0.1, 0.01, 0.001];
        let v: Vec<f64> = h.iter().map(|&x| 3.0 + 2.0 * x - 5.0 * x * x).collect();
        let e = richardson(&h, &v, f64::abs);
        assert!((e.value - 3.0).abs() < 1e-13);
    }

    #[test]
    fn repeated_average_of_constant() {
        assert_eq!(repeated_average(&[2.0; 9]), 2.0);
    }
}
