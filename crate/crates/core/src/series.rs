//! Truncated power series `Σ_{n=0}^{N} aₙ zⁿ` with a coefficient majorant
//! `|aₙ| ≤ C n^p` for the dropped tail `n > N`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accel::{repeated_average, richardson, AVERAGING_ROUNDS};

/// Radii used for boundary limits in [`EvalMode::Extrapolated`].
pub const BOUNDARY_RADII: [f64; 3] = [0.9, 0.99, 0.999];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("expected at least {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("|z| = {radius} is outside the open unit disk")]
    RadiusError { radius: f64 },
    #[error("order must be at least 1 (got {0})")]
    OrderTooSmall(usize),
    #[error("transform needs a vanishing constant term (got {0})")]
    ConstantTerm(Complex64),
}

/// `|aₙ| ≤ scale · n^power` for every `n` beyond the stored order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Majorant {
    pub scale: f64,
    pub power: f64,
}

impl Majorant {
    pub const ZERO: Majorant = Majorant { scale: 0.0, power: 0.0 };

    /// Bound on `Σ_{n>N} scale n^power rⁿ`.
    pub fn tail_sum(&self, order: usize, r: f64) -> f64 {
        if self.scale == 0.0 || r == 0.0 {
            return 0.0;
        }
        if r >= 1.0 {
            return f64::INFINITY;
        }
        let p = self.power;
        let mut n = (order + 1) as f64;
        let mut term = self.scale * n.powf(p) * r.powf(n);
        let mut sum = 0.0;
        for _ in 0..10_000_000 {
            // Successive ratios ((n+1)/n)^p r are nonincreasing for p ≥ 0 and
            // at most r for p < 0.
            let q = ((n + 1.0) / n).powf(p.max(0.0)) * r;
            if q < 1.0 {
                return sum + term / (1.0 - q);
            }
            sum += term;
            n += 1.0;
            term = self.scale * n.powf(p) * r.powf(n);
        }
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
    majorant: Majorant,
}

/// A value with an error estimate (tail bound or extrapolation correction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Horner partial sum at `z`; error is the tail bound at `|z|`.
    Direct,
    /// Boundary value along the ray through `z`: averaged partial sums at
    /// the radii of [`BOUNDARY_RADII`], extrapolated to radius 1.
    Extrapolated,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl TruncatedSeries {
    /// Coefficients `a_0..=a_N` and a majorant for `n > N`.
    pub fn from_coeffs(coeffs: Vec<Complex64>, majorant: Majorant) -> Result<Self, SeriesError> {
        if coeffs.len() < 2 {
            return Err(SeriesError::OrderTooSmall(coeffs.len().saturating_sub(1)));
        }
        Ok(TruncatedSeries { coeffs, majorant })
    }

    pub fn from_real(coeffs: &[f64], majorant: Majorant) -> Result<Self, SeriesError> {
        Self::from_coeffs(coeffs.iter().map(|&x| c(x)).collect(), majorant)
    }

    fn build<F: Fn(usize) -> f64>(order: usize, f: F, majorant: Majorant) -> Self {
        TruncatedSeries { coeffs: (0..=order).map(|n| c(f(n))).collect(), majorant }
    }

    /// `f(z) = z`.
    pub fn identity(order: usize) -> Self {
        Self::build(order.max(1), |n| if n == 1 { 1.0 } else { 0.0 }, Majorant::ZERO)
    }

    /// `z/(1 − z)`.
    pub fn geometric(order: usize) -> Self {
        Self::build(order.max(1), |n| if n == 0 { 0.0 } else { 1.0 }, Majorant { scale: 1.0, power: 0.0 })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `zⁿ` (zero beyond the order).
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn majorant(&self) -> Majorant {
        self.majorant
    }

    /// `a₀ = 0` and `a₁ = 1`.
    pub fn is_normalized(&self) -> bool {
        self.coeffs[0].norm() <= 1e-15 && (self.coeffs[1] - c(1.0)).norm() <= 1e-15
    }

    /// Bound on `|Σ_{n>N} aₙ zⁿ|` for `|z| ≤ radius`.
    pub fn tail_bound(&self, radius: f64) -> f64 {
        self.majorant.tail_sum(self.order(), radius)
    }

    /// Drops coefficients beyond `order`, enlarging the majorant so it still
    /// covers them.
    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        let order = order.max(1);
        let p = self.majorant.power;
        let mut scale = self.majorant.scale;
        for n in order + 1..=self.order() {
            scale = scale.max(self.coeffs[n].norm() / (n as f64).powf(p));
        }
        TruncatedSeries { coeffs: self.coeffs[..=order].to_vec(), majorant: Majorant { scale, power: p } }
    }

    /// Coefficientwise (Hadamard) product at the common order.
    pub fn hadamard(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let (a, b) = (self.truncate(n), other.truncate(n));
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).collect();
        let majorant =
            Majorant { scale: a.majorant.scale * b.majorant.scale, power: a.majorant.power + b.majorant.power };
        TruncatedSeries { coeffs, majorant }
    }

    fn scaled_by<F: Fn(usize) -> f64>(&self, f: F, extra_power: f64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(n, a)| a * f(n)).collect();
        let majorant = Majorant { scale: self.majorant.scale, power: self.majorant.power + extra_power };
        TruncatedSeries { coeffs, majorant }
    }

    /// Applies `V_λ`: the coefficient of `z^{n+1}` is multiplied by
    /// `moments[n] = τₙ` (and `moments[0] = τ₀ = 1`). Needs `a₀ = 0` and at
    /// least `N` moments; the majorant is scaled by the last available
    /// moment, which bounds all later ones.
    pub fn apply_transform(&self, moments: &[f64]) -> Result<Self, SeriesError> {
        let n = self.order();
        if moments.len() < n {
            return Err(SeriesError::LengthMismatch { expected: n, got: moments.len() });
        }
        if self.coeffs[0].norm() != 0.0 {
            return Err(SeriesError::ConstantTerm(self.coeffs[0]));
        }
        let mut coeffs = self.coeffs.clone();
        for k in 1..=n {
            coeffs[k] *= moments[k - 1];
        }
        let last = moments[n.min(moments.len() - 1)].abs();
        Ok(TruncatedSeries {
            coeffs,
            majorant: Majorant { scale: self.majorant.scale * last, power: self.majorant.power },
        })
    }

    /// `ξzF′ + (1−ξ)F`: the coefficient of `zⁿ` is multiplied by `1 + ξ(n−1)`.
    pub fn k_combination(&self, xi: f64) -> Self {
        // 1 + ξ(n−1) ≤ n for ξ ∈ [0, 1].
        let extra = if xi == 0.0 { 0.0 } else { 1.0 };
        self.scaled_by(|n| 1.0 + xi * (n as f64 - 1.0), extra)
    }

    /// `f′`, one order lower.
    pub fn differentiate(&self) -> Self {
        let n = self.order();
        let mut coeffs: Vec<Complex64> = (1..=n).map(|k| self.coeffs[k] * k as f64).collect();
        if coeffs.len() < 2 {
            coeffs.push(Complex64::default());
        }
        let p = self.majorant.power + 1.0;
        let big = n as f64;
        let factor = ((big + 1.0) / big).powf(p).max(1.0);
        TruncatedSeries { coeffs, majorant: Majorant { scale: self.majorant.scale * factor, power: p } }
    }

    /// `zf′`.
    pub fn z_derivative(&self) -> Self {
        self.scaled_by(|n| n as f64, 1.0)
    }

    /// `z(zf′)′`.
    pub fn z_second_derivative(&self) -> Self {
        self.scaled_by(|n| (n * n) as f64, 2.0)
    }

    /// Partial sums `S_0..=S_N` at `z`.
    fn partial_sums(&self, z: Complex64) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut power = c(1.0);
        let mut acc = Complex64::default();
        for a in &self.coeffs {
            acc += a * power;
            out.push(acc);
            power *= z;
        }
        out
    }

    /// Horner sum at `z`.
    pub fn horner(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::default(), |acc, a| acc * z + a)
    }

    /// Partial sum at `|z| < 1` with the last `AVERAGING_ROUNDS + 1` partial
    /// sums averaged, which damps the oscillating tail near `z = −1`.
    pub fn averaged_value(&self, z: Complex64) -> Complex64 {
        let sums = self.partial_sums(z);
        let k = (AVERAGING_ROUNDS + 1).min(sums.len());
        repeated_average(&sums[sums.len() - k..])
    }

    pub fn evaluate(&self, z: Complex64, mode: EvalMode) -> Result<Evaluation, SeriesError> {
        match mode {
            EvalMode::Direct => {
                let r = z.norm();
                if r >= 1.0 {
                    return Err(SeriesError::RadiusError { radius: r });
                }
                Ok(Evaluation { value: self.horner(z), error: self.tail_bound(r) })
            }
            EvalMode::Extrapolated => {
                let r = z.norm();
                if r == 0.0 || r > 1.0 {
                    return Err(SeriesError::RadiusError { radius: r });
                }
                let dir = z / r;
                let h: Vec<f64> = BOUNDARY_RADII.iter().map(|rho| 1.0 - rho).collect();
                let vals: Vec<Complex64> = BOUNDARY_RADII.iter().map(|&rho| self.averaged_value(dir * rho)).collect();
                let e = richardson(&h, &vals, |v: Complex64| v.norm());
                Ok(Evaluation { value: e.value, error: e.last_correction })
            }
        }
    }
}

/// `φ_{μ,ν}(z) = 1 + Σ (nμ+1)(nν+1)/(n+1) zⁿ`.
pub fn phi_kernel(mu: f64, nu: f64, order: usize) -> TruncatedSeries {
    let m = (order + 1) as f64;
    let majorant = Majorant { scale: (mu + 1.0 / m) * (nu + 1.0 / m), power: 1.0 };
    TruncatedSeries::build(
        order.max(1),
        |n| {
            let n = n as f64;
            (n * mu + 1.0) * (n * nu + 1.0) / (n + 1.0)
        },
        majorant,
    )
}

/// `ψ_{μ,ν}(z) = 1 + Σ (n+1)/((nμ+1)(nν+1)) zⁿ`, the Hadamard inverse of φ.
pub fn psi_kernel(mu: f64, nu: f64, order: usize) -> TruncatedSeries {
    let m = (order + 1) as f64;
    let grow = (m + 1.0) / m;
    let majorant = if mu * nu > 0.0 {
        Majorant { scale: grow / (mu * nu), power: -1.0 }
    } else if mu.max(nu) > 0.0 {
        Majorant { scale: grow / mu.max(nu), power: 0.0 }
    } else {
        Majorant { scale: grow, power: 1.0 }
    };
    TruncatedSeries::build(
        order.max(1),
        |n| {
            let n = n as f64;
            (n + 1.0) / ((n * mu + 1.0) * (n * nu + 1.0))
        },
        majorant,
    )
}

/// `z + Σ_{n≥1} 2(1−β)/((nμ+1)(nν+1)) z^{n+1}`.
pub fn extremal_function(mu: f64, nu: f64, beta: f64, order: usize) -> TruncatedSeries {
    let order = order.max(1);
    let w = 2.0 * (1.0 - beta);
    let big = order as f64;
    let grow = (big + 1.0) / big;
    let majorant = if mu * nu > 0.0 {
        Majorant { scale: (w / (mu * nu)).abs() * grow * grow, power: -2.0 }
    } else if mu.max(nu) > 0.0 {
        Majorant { scale: (w / mu.max(nu)).abs() * grow, power: -1.0 }
    } else {
        Majorant { scale: w.abs(), power: 0.0 }
    };
    TruncatedSeries::build(
        order,
        |k| match k {
            0 => 0.0,
            1 => 1.0,
            _ => {
                let n = (k - 1) as f64;
                w / ((n * mu + 1.0) * (n * nu + 1.0))
            }
        },
        majorant,
    )
}
