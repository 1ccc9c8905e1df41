//! Generalized hypergeometric series `pFq(a; b; x)` for real arguments.

use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::accel::{averaged_sum, SumOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PfqError {
    #[error("divergent series: {0}")]
    DivergentSeries(String),
    #[error("denominator parameter {0} is a nonpositive integer")]
    PoleParameter(f64),
    #[error("series did not converge after {terms} terms")]
    NoConvergence { terms: usize },
}

const STOP_REL: f64 = 1e-14;
const MAX_TERMS: usize = 2_000_000;

fn nonpositive_integer(v: f64) -> Option<usize> {
    if v <= 0.0 && (v - v.round()).abs() < 1e-12 {
        Some((-v.round()) as usize)
    } else {
        None
    }
}

/// Ratio `term(k+1)/term(k)`.
#[inline]
fn term_ratio(numer: &[f64], denom: &[f64], x: f64, k: usize) -> f64 {
    let kf = k as f64;
    let mut r = x / (kf + 1.0);
    for a in numer {
        r *= a + kf;
    }
    for b in denom {
        r /= b + kf;
    }
    r
}

/// `Σ_k ∏(a_i)_k / ∏(b_j)_k · x^k / k!`.
///
/// Polynomial cases (a numerator parameter equal to `-m`) are summed exactly.
/// On `|x| = 1` with `p = q + 1` the parameter excess `s = Σb − Σa` decides
/// convergence: `x = −1` needs `s > −1` and is summed with averaged partial
/// sums, `x = 1` needs `s > 0`.
pub fn pfq(numer: &[f64], denom: &[f64], x: f64) -> Result<f64, PfqError> {
    let terminate = numer.iter().filter_map(|&a| nonpositive_integer(a)).min();
    if let Some(pole) = denom.iter().filter_map(|&b| nonpositive_integer(b)).min() {
        // (b)_k vanishes for k > pole; fine only if the series stops first.
        match terminate {
            Some(m) if m <= pole => {}
            _ => return Err(PfqError::PoleParameter(-(pole as f64))),
        }
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if let Some(m) = terminate {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 0..m {
            term *= term_ratio(numer, denom, x, k);
            sum += term;
        }
        return Ok(sum);
    }

    let (p, q) = (numer.len(), denom.len());
    if p > q + 1 {
        return Err(PfqError::DivergentSeries(format!("{p}F{q} has zero radius of convergence")));
    }
    if p == q + 1 {
        let excess: f64 = denom.iter().sum::<f64>() - numer.iter().sum::<f64>();
        if x.abs() > 1.0 {
            return Err(PfqError::DivergentSeries(format!("|x| = {} > 1", x.abs())));
        }
        if x == -1.0 {
            if excess <= -1.0 {
                return Err(PfqError::DivergentSeries(format!("parameter excess {excess} <= -1 at x = -1")));
            }
            return alternating(numer, denom, x);
        }
        if x == 1.0 {
            if excess <= 0.0 {
                return Err(PfqError::DivergentSeries(format!("parameter excess {excess} <= 0 at x = 1")));
            }
            return unit_argument(numer, denom, excess);
        }
    }
    if x < -0.5 {
        return alternating(numer, denom, x);
    }
    direct(numer, denom, x)
}

fn warmup(numer: &[f64], denom: &[f64]) -> usize {
    let biggest = numer.iter().chain(denom).fold(0.0f64, |m, v| m.max(v.abs()));
    (2.0 * biggest) as usize + 2
}

fn direct(numer: &[f64], denom: &[f64], x: f64) -> Result<f64, PfqError> {
    let start = warmup(numer, denom);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut quiet = 0;
    for k in 0..MAX_TERMS {
        term *= term_ratio(numer, denom, x, k);
        sum += term;
        if k >= start && term.abs() < STOP_REL * sum.abs() {
            quiet += 1;
            if quiet >= 2 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(PfqError::NoConvergence { terms: MAX_TERMS })
}

fn alternating(numer: &[f64], denom: &[f64], x: f64) -> Result<f64, PfqError> {
    // Terms are generated sequentially; averaged_sum asks for them in order.
    let mut term = 1.0;
    let mut next = 0usize;
    let result = averaged_sum(
        |n| {
            while next < n {
                term *= term_ratio(numer, denom, x, next);
                next += 1;
            }
            term
        },
        SumOptions { rel_tol: 1e-14, abs_tol: 1e-300, max_terms: MAX_TERMS },
    );
    result.map(|s| s.value).map_err(|_| PfqError::NoConvergence { terms: MAX_TERMS })
}

fn unit_argument(numer: &[f64], denom: &[f64], excess: f64) -> Result<f64, PfqError> {
    // Terms decay like C k^{-excess-1}; the remainder after k terms is about
    // term_k · k / excess.
    let start = warmup(numer, denom);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        term *= term_ratio(numer, denom, 1.0, k);
        sum += term;
        let kf = (k + 1) as f64;
        let tail = term * kf / excess;
        if k >= start && tail.abs() < 1e-4 * STOP_REL.sqrt() * sum.abs() {
            return Ok(sum + tail);
        }
    }
    Err(PfqError::NoConvergence { terms: MAX_TERMS })
}

fn recip_gamma(x: f64) -> f64 {
    if nonpositive_integer(x).is_some() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Gauss function `₂F₁(a, b; c; x)` for `x < 1`, continued past the disk of
/// fast convergence by the `x ↦ 1 − x` and Pfaff transformations.
pub fn hyp2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64, PfqError> {
    if !(x < 1.0) {
        return Err(PfqError::DivergentSeries(format!("2F1 requested at x = {x} >= 1")));
    }
    let polynomial = nonpositive_integer(a).is_some() || nonpositive_integer(b).is_some();
    if polynomial || (-0.5..=0.7).contains(&x) {
        return pfq(&[a, b], &[c], x);
    }
    if x < -0.5 {
        let w = x / (x - 1.0);
        return Ok((1.0 - x).powf(-a) * hyp2f1(a, c - b, c, w)?);
    }
    hyp2f1_complement(a, b, c, 1.0 - x)
}

/// `₂F₁(a, b; c; 1 − y)` for `y ∈ [0, 1]`, taking `y` directly so that
/// arguments close to 1 keep full relative precision in `1 − x`.
pub fn hyp2f1_complement(a: f64, b: f64, c: f64, y: f64) -> Result<f64, PfqError> {
    if !(0.0..=1.0).contains(&y) {
        return Err(PfqError::DivergentSeries(format!("2F1 complement requested at y = {y}")));
    }
    let polynomial = nonpositive_integer(a).is_some() || nonpositive_integer(b).is_some();
    if polynomial || y >= 0.3 {
        return pfq(&[a, b], &[c], 1.0 - y);
    }
    let d = c - a - b;
    if y == 0.0 {
        return pfq(&[a, b], &[c], 1.0);
    }
    if (d - d.round()).abs() < 1e-7 {
        // Logarithmic case: symmetric averages over c ± η and c ± 2η cancel
        // the odd terms; one Richardson step removes the η² term.
        const ETA: f64 = 1e-4;
        let near = 0.5 * (connection(a, b, c - ETA, y)? + connection(a, b, c + ETA, y)?);
        let far = 0.5 * (connection(a, b, c - 2.0 * ETA, y)? + connection(a, b, c + 2.0 * ETA, y)?);
        return Ok((4.0 * near - far) / 3.0);
    }
    connection(a, b, c, y)
}

fn connection(a: f64, b: f64, c: f64, y: f64) -> Result<f64, PfqError> {
    let d = c - a - b;
    let gc = gamma(c);
    let first = gc * gamma(d) * recip_gamma(c - a) * recip_gamma(c - b);
    let second = gc * gamma(-d) * recip_gamma(a) * recip_gamma(b);
    let mut value = 0.0;
    if first != 0.0 {
        value += first * pfq(&[a, b], &[1.0 - d], y)?;
    }
    if second != 0.0 {
        value += second * y.powf(d) * pfq(&[c - a, c - b], &[1.0 + d], y)?;
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_series() {
        for &x in &[-0.9, -0.3, 0.2, 0.6, 0.95] {
            let v = pfq(&[2.5], &[], x).unwrap();
            assert!((v - (1.0 - x).powf(-2.5)).abs() < 1e-12 * v.abs(), "x={x}");
        }
    }

    #[test]
    fn logarithm_series() {
        let v = pfq(&[1.0, 1.0], &[2.0], 0.5).unwrap();
        assert!((v - 2.0 * 2f64.ln()).abs() < 1e-13);
        let v = pfq(&[1.0, 1.0], &[2.0], -1.0).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-12, "{v}");
    }

    #[test]
    fn exponential_and_zero_argument() {
        assert!((pfq(&[], &[], 1.0).unwrap() - 1f64.exp()).abs() < 1e-14);
        assert_eq!(pfq(&[3.0, -0.5], &[1.5], 0.0).unwrap(), 1.0);
    }

    #[test]
    fn polynomial_case_is_exact() {
        // 2F1(-2, b; c; x) = 1 - 2bx/c + b(b+1)x²/(c(c+1))
        let (b, c, x) = (1.5, 2.5, 3.0);
        let v = pfq(&[-2.0, b], &[c], x).unwrap();
        let exact = 1.0 - 2.0 * b * x / c + b * (b + 1.0) * x * x / (c * (c + 1.0));
        assert!((v - exact).abs() < 1e-14);
    }

    #[test]
    fn errors() {
        assert!(matches!(pfq(&[1.0], &[-2.0], 0.5), Err(PfqError::PoleParameter(_))));
        assert!(matches!(pfq(&[1.0, 1.0, 1.0], &[1.0], 0.5), Err(PfqError::DivergentSeries(_))));
        assert!(matches!(pfq(&[1.0, 1.0], &[1.0], -1.0), Err(PfqError::DivergentSeries(_))));
        assert!(matches!(pfq(&[1.0, 1.0], &[2.0], 1.5), Err(PfqError::DivergentSeries(_))));
    }

    #[test]
    fn gauss_sum_at_unit_argument() {
        // 2F1(a,b;c;1) = Γ(c)Γ(c-a-b)/(Γ(c-a)Γ(c-b))
        let (a, b, c) = (0.5, 0.25, 3.0);
        let exact = gamma(c) * gamma(c - a - b) / (gamma(c - a) * gamma(c - b));
        let v = pfq(&[a, b], &[c], 1.0).unwrap();
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn reflection_available() {
        // Γ(−1/2) = −2√π
        assert!((gamma(-0.5) + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hyp2f1_continuation_matches_closed_forms() {
        // 2F1(1,1;2;x) = -ln(1-x)/x   (integer c-a-b = 0)
        for &x in &[0.75, 0.9, 0.99, 0.999999] {
            let v = hyp2f1(1.0, 1.0, 2.0, x).unwrap();
            let exact = -(1.0 - x).ln() / x;
            assert!((v - exact).abs() < 1e-9 * exact, "x={x}: {v} vs {exact}");
        }
        // 2F1(a, b; b; x) = (1-x)^{-a}
        for &x in &[0.8, 0.95, 0.9999] {
            let v = hyp2f1(0.3, 1.7, 1.7, x).unwrap();
            let exact = (1.0 - x).powf(-0.3);
            assert!((v - exact).abs() < 1e-10 * exact, "x={x}");
        }
        // 2F1(1/2, 1; 3/2; -x²) = atan(x)/x ; Pfaff branch
        for &x in &[1.0f64, 2.0, 5.0] {
            let v = hyp2f1(0.5, 1.0, 1.5, -x * x).unwrap();
            assert!((v - x.atan() / x).abs() < 1e-12, "x={x}");
        }
    }
}
