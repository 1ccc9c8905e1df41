//! The auxiliary functions g, q and their combination, the test kernels h_σ
//! and the integrand L_{σ,ξ,z}.

pub mod pfq;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accel::{averaged_sum, SumOptions};
use crate::params::ParameterSet;
use crate::quad::{integrate, QuadError, QuadOptions};

pub use pfq::{hyp2f1, hyp2f1_complement, pfq, PfqError};

/// Largest `t` at which the series forms of g and q are used.
pub const SERIES_LIMIT: f64 = 0.99;

/// Distance from the pole `z = 1` below which `h_σ` is refused.
pub const POLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuxError {
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("argument {z} is within {POLE_TOL:e} of the pole at 1")]
    Pole { z: Complex64 },
    #[error("series for t = {t} did not converge")]
    ConvergenceFailure { t: f64 },
    #[error("quadrature: {0}")]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Hypergeometric(#[from] PfqError),
}

/// Series or integral representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    Series,
    Integral,
}

/// Parameters shared by every evaluation: `μ, ν, σ, ξ` and the unimodular `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxContext {
    mu: f64,
    nu: f64,
    sigma: f64,
    xi: f64,
    epsilon: Complex64,
}

fn inner_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 2000 }
}

fn outer_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-12, rel_tol: 1e-11, max_intervals: 2000 }
}

/// `h_σ(−x)/(−x)` at `ε = 1`: `(1 − σ(1+x))/((1−σ)(1+x)²)`.
pub fn phi_g(sigma: f64, x: f64) -> f64 {
    (1.0 - sigma * (1.0 + x)) / ((1.0 - sigma) * (1.0 + x) * (1.0 + x))
}

/// `h′_σ(−x)` at `ε = 1`: `(1 − σ − (1+σ)x)/((1−σ)(1+x)³)`.
pub fn phi_q(sigma: f64, x: f64) -> f64 {
    (1.0 - sigma - (1.0 + sigma) * x) / ((1.0 - sigma) * (1.0 + x).powi(3))
}

impl AuxContext {
    pub fn new(mu: f64, nu: f64, sigma: f64, xi: f64, epsilon: Complex64) -> Result<Self, AuxError> {
        if !(mu >= 0.0 && nu > 0.0 && mu <= nu) {
            return Err(AuxError::InvalidContext(format!("need 0 <= mu <= nu, nu > 0 (got {mu}, {nu})")));
        }
        if !(0.0..1.0).contains(&sigma) {
            return Err(AuxError::InvalidContext(format!("sigma must lie in [0, 1) (got {sigma})")));
        }
        if !(0.0..=1.0).contains(&xi) {
            return Err(AuxError::InvalidContext(format!("xi must lie in [0, 1] (got {xi})")));
        }
        if (epsilon.norm() - 1.0).abs() > 1e-12 {
            return Err(AuxError::InvalidContext(format!("|epsilon| must be 1 (got {})", epsilon.norm())));
        }
        Ok(AuxContext { mu, nu, sigma, xi, epsilon })
    }

    /// Context for `params` with `ε = 1`.
    pub fn from_params(p: &ParameterSet) -> Result<Self, AuxError> {
        Self::new(p.mu, p.nu, p.sigma, p.xi, Complex64::new(1.0, 0.0))
    }

    pub fn with_epsilon(self, epsilon: Complex64) -> Result<Self, AuxError> {
        Self::new(self.mu, self.nu, self.sigma, self.xi, epsilon)
    }

    pub fn with_xi(self, xi: f64) -> Result<Self, AuxError> {
        Self::new(self.mu, self.nu, self.sigma, xi, self.epsilon)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn epsilon(&self) -> Complex64 {
        self.epsilon
    }

    /// `(n+1−σ)/((1−σ)(1+nμ)(1+nν))`.
    fn base_coeff(&self, n: usize) -> f64 {
        let nf = n as f64;
        (nf + 1.0 - self.sigma) / ((1.0 - self.sigma) * (1.0 + nf * self.mu) * (1.0 + nf * self.nu))
    }

    fn sum_series<F: Fn(usize) -> f64>(&self, t: f64, coeff: F) -> Result<f64, AuxError> {
        if t == 0.0 {
            return Ok(coeff(0));
        }
        let opts = SumOptions { rel_tol: 1e-15, abs_tol: 1e-15, max_terms: 1 << 16 };
        // Powers by running product, restarted each call of the closure
        // in increasing order.
        let mut power = 1.0;
        let mut next = 0usize;
        averaged_sum(
            |n| {
                while next < n {
                    power *= -t;
                    next += 1;
                }
                coeff(n) * power
            },
            opts,
        )
        .map(|s| s.value)
        .map_err(|_| AuxError::ConvergenceFailure { t })
    }

    /// `g(t)` from its power series.
    pub fn g_series(&self, t: f64) -> Result<f64, AuxError> {
        Ok(2.0 * self.sum_series(t, |n| self.base_coeff(n))? - 1.0)
    }

    /// `q(t)` from its power series.
    pub fn q_series(&self, t: f64) -> Result<f64, AuxError> {
        self.sum_series(t, |n| (n as f64 + 1.0) * self.base_coeff(n))
    }

    /// `(1−ξ)g + ξ(2q − 1)` from its power series.
    pub fn combined_series(&self, t: f64) -> Result<f64, AuxError> {
        let xi = self.xi;
        Ok(2.0 * self.sum_series(t, |n| (1.0 + xi * n as f64) * self.base_coeff(n))? - 1.0)
    }

    /// `∫∫ φ(u^μ v^ν t) du dv`, or `∫ φ(t u^ν) du` when `μ = 0`.
    fn kernel_average<F: Fn(f64) -> f64 + Copy>(&self, t: f64, phi: F) -> Result<f64, AuxError> {
        let (mu, nu) = (self.mu, self.nu);
        let single = |x: f64, p: f64| integrate(|u: f64| phi(x * u.powf(p)), 0.0, 1.0, inner_opts()).map(|r| r.value);
        if mu == 0.0 {
            return Ok(single(t, nu)?);
        }
        let mut failure = None;
        let r = integrate(
            |v: f64| match single(t * v.powf(nu), mu) {
                Ok(x) => x,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            1.0,
            outer_opts(),
        );
        if let Some(e) = failure {
            return Err(e.into());
        }
        Ok(r?.value)
    }

    /// `g(t)` from its integral representation.
    pub fn g_integral(&self, t: f64) -> Result<f64, AuxError> {
        let s = self.sigma;
        Ok(2.0 * self.kernel_average(t, move |x| phi_g(s, x))? - 1.0)
    }

    /// `q(t)` from its integral representation.
    pub fn q_integral(&self, t: f64) -> Result<f64, AuxError> {
        let s = self.sigma;
        self.kernel_average(t, move |x| phi_q(s, x))
    }

    fn check_t(t: f64) -> Result<(), AuxError> {
        if (0.0..=1.0).contains(&t) {
            Ok(())
        } else {
            Err(AuxError::InvalidContext(format!("t must lie in [0, 1] (got {t})")))
        }
    }

    /// `g(t)`: series up to [`SERIES_LIMIT`], integral form beyond it or
    /// when the series fails to settle.
    pub fn g_value(&self, t: f64) -> Result<f64, AuxError> {
        Self::check_t(t)?;
        if t <= SERIES_LIMIT {
            if let Ok(v) = self.g_series(t) {
                return Ok(v);
            }
        }
        self.g_integral(t)
    }

    /// `q(t)`, with the same branch policy as [`Self::g_value`].
    pub fn q_value(&self, t: f64) -> Result<f64, AuxError> {
        Self::check_t(t)?;
        if t <= SERIES_LIMIT {
            if let Ok(v) = self.q_series(t) {
                return Ok(v);
            }
        }
        self.q_integral(t)
    }

    /// `(1−ξ)g(t) + ξ(2q(t) − 1)`.
    pub fn combined_gq(&self, t: f64) -> Result<f64, AuxError> {
        Self::check_t(t)?;
        if t <= SERIES_LIMIT {
            if let Ok(v) = self.combined_series(t) {
                return Ok(v);
            }
        }
        let xi = self.xi;
        let g = if xi < 1.0 { self.g_integral(t)? } else { 0.0 };
        let q = if xi > 0.0 { self.q_integral(t)? } else { 0.0 };
        Ok((1.0 - xi) * g + xi * (2.0 * q - 1.0))
    }

    /// The combination as `2·₅F₄(1, 1/μ, 1/ν, 2−σ, 1+1/ξ; 1+1/μ, 1+1/ν, 1−σ, 1/ξ; −t) − 1`
    /// (the `1/μ` pair is dropped when `μ = 0`).
    pub fn combined_hypergeometric(&self, t: f64) -> Result<f64, AuxError> {
        if self.xi == 0.0 {
            return Err(AuxError::InvalidContext("the hypergeometric form needs xi > 0".into()));
        }
        let (s, xi) = (self.sigma, self.xi);
        let mut numer = vec![1.0, 1.0 / self.nu, 2.0 - s, 1.0 + 1.0 / xi];
        let mut denom = vec![1.0 + 1.0 / self.nu, 1.0 - s, 1.0 / xi];
        if self.mu > 0.0 {
            numer.push(1.0 / self.mu);
            denom.push(1.0 + 1.0 / self.mu);
        }
        Ok(2.0 * pfq(&numer, &denom, -t)? - 1.0)
    }

    /// Right side of the first-order equation for g:
    /// `d/dt[t^{1/ν}(1 + g)] = (2/ν) t^{1/ν−1} ∫₀¹ φ_g(u^μ t) du`.
    pub fn g_ode_rhs(&self, t: f64) -> Result<f64, AuxError> {
        let s = self.sigma;
        let avg = self.single_average(t, move |x| phi_g(s, x))?;
        Ok(2.0 / self.nu * t.powf(1.0 / self.nu - 1.0) * avg)
    }

    /// `d/dt[t^{1/ν} q] = (1/ν) t^{1/ν−1} ∫₀¹ φ_q(u^μ t) du`.
    pub fn q_ode_rhs(&self, t: f64) -> Result<f64, AuxError> {
        let s = self.sigma;
        let avg = self.single_average(t, move |x| phi_q(s, x))?;
        Ok(1.0 / self.nu * t.powf(1.0 / self.nu - 1.0) * avg)
    }

    fn single_average<F: Fn(f64) -> f64>(&self, t: f64, phi: F) -> Result<f64, AuxError> {
        if self.mu == 0.0 {
            return Ok(phi(t));
        }
        let mu = self.mu;
        Ok(integrate(|u: f64| phi(t * u.powf(mu)), 0.0, 1.0, inner_opts())?.value)
    }

    fn kappa(&self) -> Complex64 {
        (self.epsilon + (2.0 * self.sigma - 1.0)) / (2.0 * (1.0 - self.sigma))
    }

    fn pole_check(z: Complex64) -> Result<(), AuxError> {
        if (Complex64::new(1.0, 0.0) - z).norm() < POLE_TOL {
            Err(AuxError::Pole { z })
        } else {
            Ok(())
        }
    }

    /// `h_σ(z) = z(1 + κz)/(1 − z)²`, `κ = (ε + 2σ − 1)/(2(1−σ))`.
    pub fn h_sigma(&self, z: Complex64) -> Result<Complex64, AuxError> {
        Self::pole_check(z)?;
        let one = Complex64::new(1.0, 0.0);
        Ok(z * (one + self.kappa() * z) / ((one - z) * (one - z)))
    }

    /// `h_σ′(z) = (1 + z + 2κz)/(1 − z)³`.
    pub fn h_sigma_prime(&self, z: Complex64) -> Result<Complex64, AuxError> {
        Self::pole_check(z)?;
        let one = Complex64::new(1.0, 0.0);
        let d = one - z;
        Ok((one + z + 2.0 * self.kappa() * z) / (d * d * d))
    }

    /// `h_σ(w)/w`, continuous at `w = 0`.
    pub fn h_sigma_quotient(&self, w: Complex64) -> Result<Complex64, AuxError> {
        Self::pole_check(w)?;
        let one = Complex64::new(1.0, 0.0);
        Ok((one + self.kappa() * w) / ((one - w) * (one - w)))
    }

    /// `L_{σ,ξ,z}(t)`.
    pub fn l_integrand(&self, z: Complex64, t: f64) -> Result<f64, AuxError> {
        let w = z * t;
        let (s, xi) = (self.sigma, self.xi);
        let first = self.h_sigma_quotient(w)?.re - phi_g(s, t);
        let second = self.h_sigma_prime(w)?.re - phi_q(s, t);
        Ok((1.0 - xi) * first + xi * second)
    }

    /// `L` split by its dependence on `ε`: `L = l0 + Re(ε · l1)`.
    pub fn l_parts(&self, z: Complex64, t: f64) -> Result<(f64, Complex64), AuxError> {
        let w = z * t;
        Self::pole_check(w)?;
        let (s, xi) = (self.sigma, self.xi);
        let one = Complex64::new(1.0, 0.0);
        let d = one - w;
        let d2 = d * d;
        let d3 = d2 * d;
        let k0 = (2.0 * s - 1.0) / (2.0 * (1.0 - s));
        let a = (1.0 - xi) * (one + k0 * w) / d2 + xi * (one + w + 2.0 * k0 * w) / d3;
        let b = ((1.0 - xi) * w / d2 + 2.0 * xi * w / d3) / (2.0 * (1.0 - s));
        let l0 = a.re - (1.0 - xi) * phi_g(s, t) - xi * phi_q(s, t);
        Ok((l0, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(mu: f64, nu: f64, sigma: f64, xi: f64) -> AuxContext {
        AuxContext::new(mu, nu, sigma, xi, Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn context_validation() {
        let e = Complex64::new(1.0, 0.0);
        assert!(AuxContext::new(1.0, 2.0, 1.0, 0.5, e).is_err());
        assert!(AuxContext::new(1.0, 2.0, 0.1, 1.5, e).is_err());
        assert!(AuxContext::new(1.0, 2.0, 0.1, 0.5, Complex64::new(0.5, 0.0)).is_err());
        assert!(AuxContext::new(1.0, 2.0, 0.1, 0.5, Complex64::from_polar(1.0, 0.7)).is_ok());
    }

    #[test]
    fn initial_values() {
        let c = ctx(1.0, 2.0, 0.1, 0.5);
        assert_eq!(c.g_value(0.0).unwrap(), 1.0);
        assert_eq!(c.q_value(0.0).unwrap(), 1.0);
    }

    #[test]
    fn g_at_one_for_unit_parameters() {
        // μ = ν = 1, σ = 0: g(1) = 2 Σ (−1)ⁿ/(n+1) − 1 = 2 ln 2 − 1.
        let c = ctx(1.0, 1.0, 0.0, 0.0);
        let v = c.g_value(1.0).unwrap();
        assert!((v - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-9, "{v}");
    }

    #[test]
    fn series_and_integral_agree() {
        for &(mu, nu, s) in &[(1.0, 1.0, 0.0), (1.0, 2.0, 0.1), (0.0, 1.5, 0.2), (0.5, 2.0, 0.05)] {
            let c = ctx(mu, nu, s, 0.3);
            for &t in &[0.1, 0.5, 0.9, 0.99] {
                let (gs, gi) = (c.g_series(t).unwrap(), c.g_integral(t).unwrap());
                let (qs, qi) = (c.q_series(t).unwrap(), c.q_integral(t).unwrap());
                assert!((gs - gi).abs() < 1e-9, "g mu={mu} nu={nu} t={t}: {gs} vs {gi}");
                assert!((qs - qi).abs() < 1e-9, "q mu={mu} nu={nu} t={t}: {qs} vs {qi}");
            }
        }
    }

    #[test]
    fn combined_forms_agree() {
        let c = ctx(1.0, 2.0, 0.1, 0.5);
        let direct = c.combined_series(0.3).unwrap();
        let hyper = c.combined_hypergeometric(0.3).unwrap();
        assert!((direct - hyper).abs() < 1e-9);
        let split = 0.5 * c.g_value(0.3).unwrap() + 0.5 * (2.0 * c.q_value(0.3).unwrap() - 1.0);
        assert!((direct - split).abs() < 1e-12);
        let g_only = ctx(1.0, 2.0, 0.1, 0.0);
        assert_eq!(g_only.combined_gq(0.4).unwrap(), g_only.g_value(0.4).unwrap());
    }

    #[test]
    fn h_sigma_identities() {
        let c = ctx(1.0, 2.0, 0.2, 0.5);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(c.h_sigma(zero).unwrap(), zero);
        assert_eq!(c.h_sigma_prime(zero).unwrap(), Complex64::new(1.0, 0.0));
        for &t in &[0.1, 0.5, 0.9] {
            let w = Complex64::new(-t, 0.0);
            let q = c.h_sigma(w).unwrap() / w;
            assert!((q.re - phi_g(0.2, t)).abs() < 1e-14 && q.im.abs() < 1e-15);
        }
        let koebe = ctx(1.0, 1.0, 0.0, 0.0);
        let z = Complex64::new(0.3, -0.4);
        let one = Complex64::new(1.0, 0.0);
        assert!((koebe.h_sigma(z).unwrap() - z / ((one - z) * (one - z))).norm() < 1e-15);
        assert!(matches!(c.h_sigma(Complex64::new(1.0, 1e-12)), Err(AuxError::Pole { .. })));
    }

    #[test]
    fn h_sigma_prime_matches_difference_quotient() {
        let c = ctx(1.0, 2.0, 0.1, 0.5).with_epsilon(Complex64::from_polar(1.0, 2.1)).unwrap();
        let z = Complex64::new(0.2, 0.5);
        let h = Complex64::new(1e-6, 0.0);
        let fd = (c.h_sigma(z + h).unwrap() - c.h_sigma(z - h).unwrap()) / (2.0 * h);
        assert!((fd - c.h_sigma_prime(z).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn l_parts_reassemble() {
        let base = ctx(1.0, 2.0, 0.1, 0.4);
        let z = Complex64::from_polar(0.93, 2.5);
        for &theta in &[0.0, 1.0, 3.0] {
            let eps = Complex64::from_polar(1.0, theta);
            let c = base.with_epsilon(eps).unwrap();
            let (l0, l1) = c.l_parts(z, 0.7).unwrap();
            let l = c.l_integrand(z, 0.7).unwrap();
            assert!((l0 + (eps * l1).re - l).abs() < 1e-13);
        }
    }

    #[test]
    fn l_vanishes_toward_minus_one() {
        let c = ctx(1.0, 2.0, 0.1, 0.5);
        let z = Complex64::new(-1.0 + 1e-4, 0.0);
        for i in 0..=18 {
            let t = 0.05 + 0.05 * i as f64;
            let l = c.l_integrand(z, t).unwrap();
            assert!(l.abs() <= 1e-3 / (1.0 + t).powi(2), "t={t}: {l}");
        }
    }
}
