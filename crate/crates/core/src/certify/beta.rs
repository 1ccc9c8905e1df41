use serde::{Deserialize, Serialize};

use super::CertifyError;
use crate::accel::{averaged_sum, SumError, SumOptions};
use crate::auxfun::{pfq, AuxContext, AuxError};
use crate::kernels::KernelSpec;
use crate::params::ParameterSet;
use crate::quad::{integrate_singular_gap, Endpoint, QuadOptions};

/// Largest disagreement tolerated between the two β routes.
pub const ROUTE_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSolution {
    /// The quadrature-route value.
    pub beta: f64,
    pub beta_integral: f64,
    pub beta_series: f64,
    /// `∫ λ · ((1−ξ)g + ξ(2q−1))` by quadrature.
    pub integral: f64,
    /// The same quantity from the moment series.
    pub series: f64,
}

/// `β = I/(I − 1)` from `β/(1−β) = −I`.
pub fn beta_from_integral(i: f64) -> Result<f64, CertifyError> {
    if (i - 1.0).abs() < 1e-12 {
        return Err(CertifyError::BetaUnbounded { value: i });
    }
    Ok(i / (i - 1.0))
}

fn integral_route(kernel: &KernelSpec, ctx: &AuxContext) -> Result<f64, CertifyError> {
    let (s0, s1) = kernel.endpoint_exponents();
    let mut failure: Option<CertifyError> = None;
    let r = integrate_singular_gap(
        |t, y| {
            let v = kernel.density_with_complement(t, y).map_err(CertifyError::from).and_then(|l| {
                let c = ctx.combined_gq(t)?;
                Ok::<f64, CertifyError>(l * c)
            });
            match v {
                Ok(x) => x,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        1.0,
        Endpoint::Power(s0),
        Endpoint::Power(s1),
        QuadOptions { abs_tol: 1e-12, rel_tol: 1e-11, max_intervals: 4000 },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

fn series_route(kernel: &KernelSpec, ctx: &AuxContext) -> Result<f64, CertifyError> {
    let (mu, nu, s, xi) = (ctx.mu(), ctx.nu(), ctx.sigma(), ctx.xi());
    let coeff = |n: usize| {
        let nf = n as f64;
        2.0 * (1.0 + xi * nf) * (nf + 1.0 - s) / ((1.0 - s) * (1.0 + nf * mu) * (1.0 + nf * nu))
    };
    let mut n_max = 256usize;
    loop {
        let tau = kernel.moments(n_max)?;
        let r = averaged_sum(
            |n| {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                sign * coeff(n) * tau[n]
            },
            SumOptions { rel_tol: 1e-13, abs_tol: 1e-14, max_terms: n_max + 1 },
        );
        match r {
            Ok(sum) => return Ok(sum.value - 1.0),
            Err(SumError::NoConvergence { .. }) if n_max < 1 << 16 => n_max *= 4,
            Err(e) => {
                return Err(CertifyError::Aux(AuxError::InvalidContext(format!("moment series: {e}"))));
            }
        }
    }
}

/// Sharp β from `β/(1−β) = −∫₀¹ λ(t)((1−ξ)g(t) + ξ(2q(t)−1)) dt`, computed
/// by quadrature and by the moment series; the routes must agree.
pub fn beta_sharp(kernel: &KernelSpec, params: &ParameterSet) -> Result<BetaSolution, CertifyError> {
    let ctx = AuxContext::from_params(params)?;
    let integral = integral_route(kernel, &ctx)?;
    let series = series_route(kernel, &ctx)?;
    let beta_integral = beta_from_integral(integral)?;
    let beta_series = beta_from_integral(series)?;
    if !((beta_integral - beta_series).abs() <= ROUTE_TOLERANCE) {
        return Err(CertifyError::RepresentationMismatch { integral: beta_integral, series: beta_series });
    }
    Ok(BetaSolution { beta: beta_integral, beta_integral, beta_series, integral, series })
}

/// `β₀ = 1 − 1/(2(1 − ₆F₅(1, b, 1/μ, 1/ν, 2−σ, 1+1/ξ; c, 1+1/μ, 1+1/ν, 1−σ, 1/ξ; −1)))`
/// for the Hohlov kernel with `a = 1` (the `1/μ` pair is dropped at `μ = 0`).
pub fn beta0_hohlov_closed_form(params: &ParameterSet, b: f64, c: f64) -> Result<f64, CertifyError> {
    let (mu, nu, s, xi) = (params.mu, params.nu, params.sigma, params.xi);
    if !(xi > 0.0) {
        return Err(CertifyError::DomainError("the closed form needs xi > 0".into()));
    }
    let mut numer = vec![1.0, b, 1.0 / nu, 2.0 - s, 1.0 + 1.0 / xi];
    let mut denom = vec![c, 1.0 + 1.0 / nu, 1.0 - s, 1.0 / xi];
    if mu > 0.0 {
        numer.push(1.0 / mu);
        denom.push(1.0 + 1.0 / mu);
    }
    let f = pfq(&numer, &denom, -1.0)?;
    if (1.0 - f).abs() < 1e-10 {
        return Err(CertifyError::BetaUnbounded { value: 2.0 * f - 1.0 });
    }
    Ok(1.0 - 1.0 / (2.0 * (1.0 - f)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(mu: f64, nu: f64, sigma: f64, xi: f64) -> ParameterSet {
        ParameterSet::from_mu_nu(mu, nu, sigma, xi).unwrap()
    }

    #[test]
    fn constant_integrand_gives_one_half() {
        assert_eq!(beta_from_integral(-2.0).unwrap(), 2.0 / 3.0);
        assert_eq!(beta_from_integral(-1.0).unwrap(), 0.5);
        assert!(matches!(beta_from_integral(1.0), Err(CertifyError::BetaUnbounded { .. })));
    }

    #[test]
    fn bernardi_against_long_direct_sum() {
        // λ = 2t, μ = ν = 1, σ = ξ = 0: τₙ = 2/(n+2).
        let k = KernelSpec::bernardi(1.0).unwrap();
        let p = params(1.0, 1.0, 0.0, 0.0);
        let sol = beta_sharp(&k, &p).unwrap();
        // Pair consecutive terms so the direct sum converges absolutely.
        let term = |n: f64| 2.0 * (n + 1.0) / ((1.0 + n) * (1.0 + n)) * 2.0 / (n + 2.0);
        let mut i = 0.0;
        let mut n = 0.0;
        while n < 1e6 {
            i += term(n) - term(n + 1.0);
            n += 2.0;
        }
        let oracle = (i - 1.0) / (i - 2.0);
        assert!((sol.beta - oracle).abs() < 1e-9, "{} vs {oracle}", sol.beta);
        assert!((sol.beta_integral - sol.beta_series).abs() < 1e-9);
    }

    #[test]
    fn convex_case_matches_q_relation() {
        // ξ = 1: β/(1−β) = −∫λ(2q − 1) ⇔ (β − 1/2)/(1 − β) = −∫λq.
        let k = KernelSpec::komatu(0.0, 3.0).unwrap();
        let p = params(1.0, 2.0, 0.1, 1.0);
        let sol = beta_sharp(&k, &p).unwrap();
        let ctx = AuxContext::from_params(&p).unwrap();
        let lq = crate::quad::integrate_singular(
            |t| k.density(t).unwrap() * ctx.q_value(t).unwrap(),
            0.0,
            1.0,
            Endpoint::Power(0.0),
            Endpoint::Power(2.0),
            QuadOptions { abs_tol: 1e-12, rel_tol: 1e-11, max_intervals: 4000 },
        )
        .unwrap()
        .value;
        let lhs = (sol.beta - 0.5) / (1.0 - sol.beta);
        assert!((lhs + lq).abs() < 1e-9, "{lhs} vs {}", -lq);
    }

    #[test]
    fn hohlov_closed_form_sanity() {
        // At the plumbing level: ₆F₅ at 0 is 1.
        assert_eq!(pfq(&[1.0, 1.0, 1.0, 0.5, 1.9, 2.0], &[4.0, 2.0, 1.5, 0.9, 1.0], 0.0).unwrap(), 1.0);
        let p = params(1.0, 2.0, 0.1, 1.0);
        let k = KernelSpec::hohlov(1.0, 1.0, 4.0).unwrap();
        let sharp = beta_sharp(&k, &p).unwrap().beta;
        let closed = beta0_hohlov_closed_form(&p, 1.0, 4.0).unwrap();
        assert!((sharp - closed).abs() < 1e-6, "{sharp} vs {closed}");
        assert!(beta0_hohlov_closed_form(&params(1.0, 2.0, 0.1, 0.0), 1.0, 4.0).is_err());
    }

    #[test]
    fn hohlov_small_b_drives_beta_down() {
        let p = params(1.0, 2.0, 0.1, 1.0);
        let values: Vec<f64> =
            [0.5, 1e-2, 1e-4].iter().map(|&b| beta0_hohlov_closed_form(&p, b, 4.0).unwrap()).collect();
        assert!(values[0] > values[1] && values[1] > values[2]);
        assert!(values[2] < -100.0, "{values:?}");
    }
}
