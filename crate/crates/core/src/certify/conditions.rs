use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CertifyError, Margin};
use crate::kernels::KernelSpec;
use crate::params::{sigma_upper_bound, ParameterSet};

/// Number of Chebyshev points in [`condition_grid`].
pub const CONDITION_POINTS: usize = 512;

/// Extra points close to the ends, where the conditions degenerate.
pub const ENDPOINT_PROBES: [f64; 4] = [1e-6, 1e-4, 1.0 - 1e-4, 1.0 - 1e-6];

/// Chebyshev points on `(0.001, 0.999)` plus [`ENDPOINT_PROBES`], sorted.
pub fn condition_grid() -> Vec<f64> {
    let (a, b) = (0.001, 0.999);
    let n = CONDITION_POINTS;
    let mut t: Vec<f64> = (0..n)
        .map(|k| {
            let x = ((2 * k + 1) as f64 * PI / (2 * n) as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * x
        })
        .chain(ENDPOINT_PROBES)
        .collect();
    t.sort_by(f64::total_cmp);
    t
}

fn check_grid(t_grid: &[f64]) -> Result<(), CertifyError> {
    if t_grid.len() < 2 {
        return Err(CertifyError::InvalidGrid("a condition grid needs at least two points".into()));
    }
    if !t_grid.iter().all(|t| *t > 0.0 && *t < 1.0) {
        return Err(CertifyError::InvalidGrid("condition grid points must lie in (0, 1)".into()));
    }
    if !t_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(CertifyError::InvalidGrid("condition grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Smallest slope `(v_{i+1} − v_i)/(t_{i+1} − t_i)`.
pub fn min_slope(values: &[f64], t_grid: &[f64]) -> f64 {
    values.windows(2).zip(t_grid.windows(2)).map(|(v, t)| (v[1] - v[0]) / (t[1] - t[0])).fold(f64::INFINITY, f64::min)
}

/// `ξ t^{1/ξ−1/μ+1} (t^{1/μ−1/ξ}Π_{μ,ν})′ / log(1/t)^{1+2σ}`, expanded with
/// `Π′ = −Λ_ν t^{1/ν−1−1/μ}` into
/// `((ξ/μ − 1)Π − ξ t^{1/ν−1/μ} Λ_ν) / log(1/t)^{1+2σ}`.
pub fn monotone_expression(kernel: &KernelSpec, params: &ParameterSet, t: f64) -> Result<f64, CertifyError> {
    let (mu, nu, s, xi) = (params.mu, params.nu, params.sigma, params.xi);
    let pi = kernel.pi_envelope(mu, nu, t)?;
    let lambda = kernel.lambda_envelope(nu, t)?;
    let l = -t.ln();
    let numer = (xi / mu - 1.0) * pi - xi * t.powf(1.0 / nu - 1.0 / mu) * lambda;
    Ok(numer / l.powf(1.0 + 2.0 * s))
}

fn monotone_domain(params: &ParameterSet) -> Result<bool, CertifyError> {
    if params.xi == 0.0 {
        return Ok(false);
    }
    if params.mu < 1.0 {
        return Err(CertifyError::DomainError(format!("the monotone condition needs mu >= 1 (got {})", params.mu)));
    }
    if !(0.0..=0.5).contains(&params.sigma) {
        return Err(CertifyError::DomainError(format!(
            "the monotone condition needs sigma in [0, 1/2] (got {})",
            params.sigma
        )));
    }
    Ok(true)
}

/// [`monotone_expression`] on the grid, or `None` when the condition does
/// not apply.
pub fn monotone_curve(kernel: &KernelSpec, params: &ParameterSet, t_grid: &[f64]) -> Option<Vec<f64>> {
    match monotone_domain(params) {
        Ok(true) => t_grid.par_iter().map(|&t| monotone_expression(kernel, params, t)).collect::<Result<_, _>>().ok(),
        _ => None,
    }
}

/// Minimum finite-difference slope of [`monotone_expression`]; a
/// nonnegative margin means the expression is nondecreasing on the grid.
pub fn check_monotone_condition(
    kernel: &KernelSpec,
    params: &ParameterSet,
    t_grid: &[f64],
) -> Result<Margin, CertifyError> {
    check_grid(t_grid)?;
    if !monotone_domain(params)? {
        return Ok(Margin::NotApplicable);
    }
    let values = t_grid.par_iter().map(|&t| monotone_expression(kernel, params, t)).collect::<Result<Vec<_>, _>>()?;
    Ok(Margin::Value(min_slope(&values, t_grid)))
}

/// Pointwise growth margins
/// `sign(λ′)·(tλ″/λ′ − (1/ξ − 2 + 2/μ − 1/ν) − (1−2σ)/log(1/t))`.
///
/// The inequality comes from `tλ″ − (…)λ′ ≥ 0` divided by `λ′`, so the
/// sign of `λ′` orients it.
pub fn growth_margins(kernel: &KernelSpec, params: &ParameterSet, t_grid: &[f64]) -> Result<Vec<f64>, CertifyError> {
    if params.xi == 0.0 {
        return Err(CertifyError::DomainError("the growth condition needs xi > 0".into()));
    }
    let k0 = params.growth_constant();
    let s = params.sigma;
    t_grid
        .par_iter()
        .map(|&t| {
            let ratio = kernel.log_derivative_ratio(t)?;
            let (_, d1, _) = kernel.derivatives(t)?;
            let rhs = k0 + (1.0 - 2.0 * s) / (-t.ln());
            Ok(d1.signum() * (ratio - rhs))
        })
        .collect()
}

/// Minimum of [`growth_margins`] over the grid.
pub fn check_growth_condition(
    kernel: &KernelSpec,
    params: &ParameterSet,
    t_grid: &[f64],
) -> Result<Margin, CertifyError> {
    check_grid(t_grid)?;
    if params.xi == 0.0 {
        return Ok(Margin::NotApplicable);
    }
    if params.mu < 1.0 {
        return Err(CertifyError::DomainError(format!("the growth condition needs mu >= 1 (got {})", params.mu)));
    }
    let bound = sigma_upper_bound(params.mu, params.nu)?;
    if params.sigma > bound {
        return Err(CertifyError::DomainError(format!(
            "the growth condition needs sigma <= {bound} (got {})",
            params.sigma
        )));
    }
    let m = growth_margins(kernel, params, t_grid)?;
    Ok(Margin::Value(m.into_iter().fold(f64::INFINITY, f64::min)))
}

/// `φ_t(a) = a(a−1)tᵃ log(1/t) − a((1/ξ + 2/μ − 1/ν − 2) log(1/t) + 1 − 2σ)tᵃ`.
pub fn phi_t(a: f64, t: f64, params: &ParameterSet) -> f64 {
    let l = -t.ln();
    let ta = t.powf(a);
    a * (a - 1.0) * ta * l - a * (params.growth_constant() * l + 1.0 - 2.0 * params.sigma) * ta
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub holds: bool,
    /// Smallest `φ_t(a) − φ_t(b)` seen.
    pub worst: f64,
    pub worst_a: f64,
    pub worst_t: f64,
}

/// Checks `φ_t(a) ≥ φ_t(b)` for every sampled `a ≤ b` and every `t`.
pub fn phi_t_monotonicity_probe(a_values: &[f64], b: f64, params: &ParameterSet, t_grid: &[f64]) -> ProbeResult {
    let mut out = ProbeResult { holds: true, worst: f64::INFINITY, worst_a: b, worst_t: f64::NAN };
    for &a in a_values.iter().filter(|a| **a <= b) {
        for &t in t_grid {
            let (fa, fb) = (phi_t(a, t, params), phi_t(b, t, params));
            let d = fa - fb;
            if d < out.worst {
                out = ProbeResult { holds: out.holds, worst: d, worst_a: a, worst_t: t };
            }
            if d < -1e-12 * fa.abs().max(fb.abs()).max(1.0) {
                out.holds = false;
            }
        }
    }
    out
}
