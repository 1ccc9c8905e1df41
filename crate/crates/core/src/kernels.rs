//! Weight densities λ(t) on (0,1), their derivatives and moments, and the
//! tail envelopes Λ_ν and Π_{μ,ν}.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::auxfun::pfq::{hyp2f1_complement, PfqError};
use crate::quad::{integrate_singular, integrate_singular_gap, Endpoint, QuadError, QuadOptions};

/// Maximum number of ω coefficients accepted by the generalized family.
pub const MAX_OMEGA_TERMS: usize = 32;

/// Relative size of λ′ below which λ′ counts as zero.
pub const CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("{0}")]
    DomainError(String),
    #[error("quadrature failed for {what}: estimate {value:e}, error estimate {error:e}")]
    QuadratureFailure { what: String, value: f64, error: f64 },
    #[error("lambda'(t) vanishes at t = {t}")]
    CriticalPoint { t: f64 },
    #[error("density integrates to {integral}, not 1")]
    NotNormalized { integral: f64 },
    #[error(transparent)]
    Hypergeometric(#[from] PfqError),
    #[error("kernel syntax: {0}")]
    Parse(String),
}

impl KernelError {
    fn quad(what: impl Into<String>, e: QuadError) -> Self {
        let what = what.into();
        match e {
            QuadError::NoConvergence { value, error } => KernelError::QuadratureFailure { what, value, error },
            QuadError::NonFinite { x } => KernelError::QuadratureFailure {
                what: format!("{what} (non-finite at {x})"),
                value: f64::NAN,
                error: f64::INFINITY,
            },
        }
    }
}

/// Family tag with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// `(1+c) t^c`.
    Bernardi { c: f64 },
    /// `(1+c)^δ/Γ(δ) t^c (log 1/t)^{δ−1}`.
    Komatu { c: f64, delta: f64 },
    /// Weight of the Hohlov operator built from `₂F₁(a, b; c; z)`.
    Hohlov { a: f64, b: f64, c: f64 },
    /// `(a+1)(b+1) t^a (1 − t^{b−a})/(b − a)`, and its limit at `b = a`.
    TwoParamLog { a: f64, b: f64 },
    /// `(1−k)(3−k)/2 · t^{−k}(1 − t²)`.
    AliSingh { k: f64 },
    /// `D t^{B−1}(1−t)^{C−A−B} ω(1−t)` with `ω(x) = 1 + Σ x_n xⁿ`.
    GeneralizedOmega { a: f64, b: f64, c: f64, omega: Vec<f64> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Bernardi { .. } => "bernardi",
            Family::Komatu { .. } => "komatu",
            Family::Hohlov { .. } => "hohlov",
            Family::TwoParamLog { .. } => "twoparam",
            Family::AliSingh { .. } => "alisingh",
            Family::GeneralizedOmega { .. } => "generalized",
        }
    }
}

/// A validated, normalized density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelRecord", into = "KernelRecord")]
pub struct KernelSpec {
    family: Family,
    normalizer: f64,
}

#[derive(Serialize, Deserialize)]
struct KernelRecord {
    #[serde(flatten)]
    family: Family,
    #[serde(default)]
    normalizer: Option<f64>,
}

impl TryFrom<KernelRecord> for KernelSpec {
    type Error = KernelError;
    fn try_from(r: KernelRecord) -> Result<Self, Self::Error> {
        KernelSpec::new(r.family)
    }
}

impl From<KernelSpec> for KernelRecord {
    fn from(k: KernelSpec) -> Self {
        KernelRecord { family: k.family, normalizer: Some(k.normalizer) }
    }
}

fn tight() -> QuadOptions {
    QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 4000 }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), KernelError> {
    if cond {
        Ok(())
    } else {
        Err(KernelError::DomainError(msg()))
    }
}

impl KernelSpec {
    /// Validates the family parameters, computes the normalizer and confirms
    /// nonnegativity and unit mass.
    pub fn new(family: Family) -> Result<Self, KernelError> {
        let normalizer = match &family {
            Family::Bernardi { c } => {
                check(*c > -1.0, || format!("bernardi needs c > -1 (got {c})"))?;
                1.0 + c
            }
            Family::Komatu { c, delta } => {
                check(*c > -1.0, || format!("komatu needs c > -1 (got {c})"))?;
                check(*delta > 0.0, || format!("komatu needs delta > 0 (got {delta})"))?;
                (delta * (1.0 + c).ln() - ln_gamma(*delta)).exp()
            }
            Family::Hohlov { a, b, c } => {
                check(*a > 0.0 && *b > 0.0 && *c > 0.0, || format!("hohlov needs a, b, c > 0 (got {a}, {b}, {c})"))?;
                check(c - a - b + 1.0 > 0.0, || format!("hohlov needs c - a - b > -1 (got {})", c - a - b))?;
                (ln_gamma(*c) - ln_gamma(*a) - ln_gamma(*b) - ln_gamma(c - a - b + 1.0)).exp()
            }
            Family::TwoParamLog { a, b } => {
                check(*a > -1.0 && *b > -1.0, || format!("twoparam needs a, b > -1 (got {a}, {b})"))?;
                if a == b {
                    (a + 1.0) * (a + 1.0)
                } else {
                    (a + 1.0) * (b + 1.0) / (b - a)
                }
            }
            Family::AliSingh { k } => {
                check((0.0..1.0).contains(k), || format!("alisingh needs 0 <= k < 1 (got {k})"))?;
                0.5 * (1.0 - k) * (3.0 - k)
            }
            Family::GeneralizedOmega { a, b, c, omega } => {
                check(*b > 0.0, || format!("generalized needs B > 0 (got {b})"))?;
                check(c - a - b > -1.0, || format!("generalized needs C - A - B > -1 (got {})", c - a - b))?;
                check(omega.len() <= MAX_OMEGA_TERMS, || {
                    format!("generalized accepts at most {MAX_OMEGA_TERMS} omega coefficients")
                })?;
                check(omega.iter().all(|x| *x >= 0.0), || "omega coefficients must be nonnegative".into())?;
                let shape = KernelSpec { family: family.clone(), normalizer: 1.0 };
                let mass = shape.integrate_weighted(|_| 1.0, 0.0, "generalized normalizer")?;
                1.0 / mass
            }
        };
        let spec = KernelSpec { family, normalizer };
        for i in 0..64 {
            let t = (i as f64 + 0.5) / 64.0;
            let v = spec.lambda(t)?;
            check(v >= 0.0 && v.is_finite(), || format!("density is negative or undefined at t = {t} ({v})"))?;
        }
        let mass = spec.integrate_weighted(|_| 1.0, 0.0, "normalization")?;
        if (mass - 1.0).abs() > 1e-9 {
            return Err(KernelError::NotNormalized { integral: mass });
        }
        Ok(spec)
    }

    pub fn bernardi(c: f64) -> Result<Self, KernelError> {
        Self::new(Family::Bernardi { c })
    }

    pub fn komatu(c: f64, delta: f64) -> Result<Self, KernelError> {
        Self::new(Family::Komatu { c, delta })
    }

    pub fn hohlov(a: f64, b: f64, c: f64) -> Result<Self, KernelError> {
        Self::new(Family::Hohlov { a, b, c })
    }

    pub fn two_param_log(a: f64, b: f64) -> Result<Self, KernelError> {
        Self::new(Family::TwoParamLog { a, b })
    }

    pub fn ali_singh(k: f64) -> Result<Self, KernelError> {
        Self::new(Family::AliSingh { k })
    }

    pub fn generalized(a: f64, b: f64, c: f64, omega: Vec<f64>) -> Result<Self, KernelError> {
        Self::new(Family::GeneralizedOmega { a, b, c, omega })
    }

    /// The uniform density, `Komatu(c = 0, δ = 1)`.
    pub fn uniform() -> Self {
        Self::komatu(0.0, 1.0).expect("uniform density is valid")
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Exponents `(s0, s1)` with `λ(t) ≍ t^{s0}` near 0 and `λ(t) ≍ (1−t)^{s1}`
    /// near 1, up to logarithms.
    pub fn endpoint_exponents(&self) -> (f64, f64) {
        match &self.family {
            Family::Bernardi { c } => (*c, 0.0),
            Family::Komatu { c, delta } => (*c, delta - 1.0),
            Family::Hohlov { a, b, c } => (a.min(*b) - 1.0, c - a - b),
            Family::TwoParamLog { a, b } => (a.min(*b), 1.0),
            Family::AliSingh { k } => (-k, 1.0),
            Family::GeneralizedOmega { a, b, c, .. } => (b - 1.0, c - a - b),
        }
    }

    /// `λ(t)` for `t ∈ (0, 1)`.
    pub fn density(&self, t: f64) -> Result<f64, KernelError> {
        if !(t > 0.0 && t < 1.0) {
            return Err(KernelError::DomainError(format!("density needs t in (0, 1) (got {t})")));
        }
        self.lambda(t)
    }

    /// `λ(t)` with `y = 1 − t` supplied by the caller (see
    /// [`crate::quad::integrate_singular_gap`]).
    pub fn density_with_complement(&self, t: f64, y: f64) -> Result<f64, KernelError> {
        if !(t > 0.0 && y > 0.0 && (t + y - 1.0).abs() <= 4.0 * f64::EPSILON) {
            return Err(KernelError::DomainError(format!("density needs t in (0, 1) and y = 1 - t (got {t}, {y})")));
        }
        self.lambda_gap(t, y)
    }

    fn lambda(&self, t: f64) -> Result<f64, KernelError> {
        self.lambda_gap(t, 1.0 - t)
    }

    /// `λ(t)` given `y = 1 − t` separately, so that factors vanishing or
    /// blowing up at `t = 1` keep their relative precision.
    fn lambda_gap(&self, t: f64, y: f64) -> Result<f64, KernelError> {
        let d = self.normalizer;
        // log(1/t) from whichever of t, y is accurate.
        let log_inv = if y < 0.5 { -(-y).ln_1p() } else { -t.ln() };
        Ok(match &self.family {
            Family::Bernardi { c } => d * t.powf(*c),
            Family::Komatu { c, delta } => d * t.powf(*c) * log_inv.powf(delta - 1.0),
            Family::Hohlov { a, b, c } => {
                let f = hyp2f1_complement(c - a, 1.0 - a, c - a - b + 1.0, t)?;
                d * t.powf(b - 1.0) * y.powf(c - a - b) * f
            }
            Family::TwoParamLog { a, b } => {
                if a == b {
                    d * t.powf(*a) * log_inv
                } else {
                    // t^a − t^b = t^b (e^{(b−a) log(1/t)} − 1)
                    d * t.powf(*b) * ((b - a) * log_inv).exp_m1()
                }
            }
            Family::AliSingh { k } => d * t.powf(-k) * y * (1.0 + t),
            Family::GeneralizedOmega { a, b, c, omega } => {
                let (w, _, _) = omega_poly(omega, y);
                d * t.powf(b - 1.0) * y.powf(c - a - b) * w
            }
        })
    }

    /// `(λ, λ′, λ″)` at `t ∈ (0, 1)`.
    pub fn derivatives(&self, t: f64) -> Result<(f64, f64, f64), KernelError> {
        if !(t > 0.0 && t < 1.0) {
            return Err(KernelError::DomainError(format!("derivatives need t in (0, 1) (got {t})")));
        }
        let d = self.normalizer;
        let l = -t.ln();
        Ok(match &self.family {
            Family::Bernardi { c } => {
                let p = t.powf(c - 2.0);
                (d * p * t * t, d * c * p * t, d * c * (c - 1.0) * p)
            }
            Family::Komatu { c, delta } => {
                let base = d * t.powf(c - 2.0) * l.powf(delta - 3.0);
                let m = c * l - delta + 1.0;
                let second = (c - 1.0) * l * m - (delta - 2.0) * m - c * l;
                (base * t * t * l * l, base * t * l * m, base * second)
            }
            Family::TwoParamLog { a, b } => {
                if a == b {
                    let p = d * t.powf(a - 2.0);
                    (p * t * t * l, p * t * (a * l - 1.0), p * (a * (a - 1.0) * l - 2.0 * a + 1.0))
                } else {
                    let (pa, pb) = (t.powf(a - 2.0), t.powf(b - 2.0));
                    (d * (pa - pb) * t * t, d * (a * pa - b * pb) * t, d * (a * (a - 1.0) * pa - b * (b - 1.0) * pb))
                }
            }
            Family::AliSingh { k } => {
                let (p, q) = (t.powf(-k - 2.0), t.powf(-k));
                (
                    d * (q - q * t * t),
                    d * (-k * p * t - (2.0 - k) * q * t),
                    d * (k * (k + 1.0) * p - (2.0 - k) * (1.0 - k) * q),
                )
            }
            Family::Hohlov { a, b, c } => {
                let (aa, bb, cc) = (c - a, 1.0 - a, c - a - b + 1.0);
                let x = 1.0 - t;
                let f0 = hyp2f1_complement(aa, bb, cc, t)?;
                let f1 = aa * bb / cc * hyp2f1_complement(aa + 1.0, bb + 1.0, cc + 1.0, t)?;
                let f2 = aa * (aa + 1.0) * bb * (bb + 1.0) / (cc * (cc + 1.0))
                    * hyp2f1_complement(aa + 2.0, bb + 2.0, cc + 2.0, t)?;
                let v = d * t.powf(b - 1.0) * x.powf(c - a - b) * f0;
                log_form(v, t, b - 1.0, c - a - b, f0, f1, f2)
            }
            Family::GeneralizedOmega { a, b, c, omega } => {
                let x = 1.0 - t;
                let (w0, w1, w2) = omega_poly(omega, x);
                let v = d * t.powf(b - 1.0) * x.powf(c - a - b) * w0;
                log_form(v, t, b - 1.0, c - a - b, w0, w1, w2)
            }
        })
    }

    /// `tλ″(t)/λ′(t)`.
    pub fn log_derivative_ratio(&self, t: f64) -> Result<f64, KernelError> {
        let (v, d1, d2) = self.derivatives(t)?;
        if d1.abs() <= CRITICAL_TOL * v.abs().max(1.0) {
            return Err(KernelError::CriticalPoint { t });
        }
        let l = -t.ln();
        Ok(match &self.family {
            Family::Bernardi { c } => c - 1.0,
            Family::TwoParamLog { a, b } if a == b => (1.0 - 2.0 * a + a * (a - 1.0) * l) / (-1.0 + a * l),
            Family::TwoParamLog { a, b } => {
                let r = t.powf(b - a);
                (a * (a - 1.0) - b * (b - 1.0) * r) / (a - b * r)
            }
            Family::AliSingh { k } => {
                let t2 = t * t;
                -(k * (1.0 + k) - (2.0 - k) * (1.0 - k) * t2) / (k + (2.0 - k) * t2)
            }
            Family::Komatu { c, delta } => {
                let m = c * l - delta + 1.0;
                ((c - 1.0) * l * m - (delta - 2.0) * m - c * l) / (l * m)
            }
            _ => t * d2 / d1,
        })
    }

    /// `∫₀¹ λ(t) tⁿ dt`.
    pub fn moment(&self, n: usize) -> Result<f64, KernelError> {
        if n == 0 {
            return Ok(1.0);
        }
        let nf = n as f64;
        Ok(match &self.family {
            Family::Bernardi { c } => (1.0 + c) / (nf + c + 1.0),
            Family::Komatu { c, delta } => ((1.0 + c) / (nf + c + 1.0)).powf(*delta),
            Family::TwoParamLog { a, b } => (a + 1.0) * (b + 1.0) / ((nf + a + 1.0) * (nf + b + 1.0)),
            Family::AliSingh { k } => self.normalizer * (1.0 / (nf + 1.0 - k) - 1.0 / (nf + 3.0 - k)),
            Family::Hohlov { .. } | Family::GeneralizedOmega { .. } => {
                self.integrate_weighted(|t| t.powi(n as i32), nf, &format!("moment {n}"))?
            }
        })
    }

    /// `τ_0, …, τ_{n_max}` (with `τ_0 = 1`).
    pub fn moments(&self, n_max: usize) -> Result<Vec<f64>, KernelError> {
        (0..=n_max).into_par_iter().map(|n| self.moment(n)).collect()
    }

    /// `∫₀¹ λ(t) w(t) dt` where `w(t) ≍ t^{extra_left}` near 0.
    fn integrate_weighted<W: Fn(f64) -> f64>(&self, w: W, extra_left: f64, what: &str) -> Result<f64, KernelError> {
        let (s0, s1) = self.endpoint_exponents();
        let mut failure = None;
        let r = integrate_singular_gap(
            |t, y| match self.lambda_gap(t, y) {
                Ok(v) => v * w(t),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            1.0,
            Endpoint::Power(s0 + extra_left),
            Endpoint::Power(s1),
            tight(),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        r.map(|i| i.value).map_err(|e| KernelError::quad(what, e))
    }

    /// `Λ_ν(t) = ∫_t¹ λ(x) x^{−1/ν} dx`.
    pub fn lambda_envelope(&self, nu: f64, t: f64) -> Result<f64, KernelError> {
        if !(nu > 0.0) {
            return Err(KernelError::DomainError(format!("lambda envelope needs nu > 0 (got {nu})")));
        }
        let p = -1.0 / nu;
        self.tail_integral(t, |_, s| (-p * s).exp(), "Lambda_nu")
    }

    /// `Π_{μ,ν}(t)`, via the single integral `∫_t¹ λ(y) y^{−1/ν} I(t, y) dy`;
    /// for `μ = 0` this is `Λ_ν`.
    pub fn pi_envelope(&self, mu: f64, nu: f64, t: f64) -> Result<f64, KernelError> {
        if mu == 0.0 {
            return self.lambda_envelope(nu, t);
        }
        if !(mu > 0.0 && nu > 0.0) {
            return Err(KernelError::DomainError(format!("Pi envelope needs mu, nu > 0 (got {mu}, {nu})")));
        }
        let p = -1.0 / nu;
        let e = 1.0 / nu - 1.0 / mu;
        let big_l = -t.ln();
        // In terms of s = log(1/y): log(y/t) = L − s and y^p = e^{−ps}.
        let kernel = move |_: f64, s: f64| {
            let r = big_l - s;
            let i = if e == 0.0 { r } else { t.powf(e) * (e * r).exp_m1() / e };
            (-p * s).exp() * i
        };
        self.tail_integral(t, kernel, "Pi_mu_nu")
    }

    fn tail_integral<W: Fn(f64, f64) -> f64>(&self, t: f64, w: W, what: &str) -> Result<f64, KernelError> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(KernelError::DomainError(format!("{what} needs t in (0, 1] (got {t})")));
        }
        if t == 1.0 {
            return Ok(0.0);
        }
        // x = e^{−s}: the scale of the integrand near x = t becomes O(1) in s
        // and 1 − x = −expm1(−s) stays exact near x = 1.
        let (_, s1) = self.endpoint_exponents();
        let mut failure = None;
        let r = integrate_singular(
            |s| {
                let x = (-s).exp();
                match self.lambda_gap(x, -(-s).exp_m1()) {
                    Ok(v) => v * w(x, s) * x,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            0.0,
            -t.ln(),
            Endpoint::Power(s1),
            Endpoint::Regular,
            QuadOptions::relative(1e-11),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        r.map(|i| i.value).map_err(|e| KernelError::quad(what, e))
    }

    /// Samples `t^{1/ν}Λ_ν(t)` and `t^{1/μ}Π_{μ,ν}(t)` toward `t = 0`.
    pub fn boundary_decay_check(&self, mu: f64, nu: f64) -> Result<BoundaryDecay, KernelError> {
        let lambda = decay_samples(|t| Ok(t.powf(1.0 / nu) * self.lambda_envelope(nu, t)?))?;
        let pi = if mu == 0.0 {
            lambda.clone()
        } else {
            decay_samples(|t| Ok(t.powf(1.0 / mu) * self.pi_envelope(mu, nu, t)?))?
        };
        Ok(BoundaryDecay { lambda, pi })
    }
}

/// Value and first two derivatives from the logarithmic form
/// `λ = v = C t^p (1−t)^q F(1−t)`.
fn log_form(v: f64, t: f64, p: f64, q: f64, f0: f64, f1: f64, f2: f64) -> (f64, f64, f64) {
    let x = 1.0 - t;
    let g1 = f1 / f0;
    let l1 = p / t - q / x - g1;
    let l2 = -p / (t * t) - q / (x * x) + f2 / f0 - g1 * g1;
    (v, v * l1, v * (l2 + l1 * l1))
}

/// `ω(x) = 1 + Σ_{n≥1} x_n xⁿ` and its first two derivatives.
fn omega_poly(coeffs: &[f64], x: f64) -> (f64, f64, f64) {
    let (mut p0, mut p1, mut p2) = (0.0, 0.0, 0.0);
    for &c in coeffs.iter().rev().chain(std::iter::once(&1.0)) {
        p2 = p2 * x + p1;
        p1 = p1 * x + p0;
        p0 = p0 * x + c;
    }
    (p0, p1, 2.0 * p2)
}

/// Sample points used by the decay test.
pub const DECAY_SAMPLES: [f64; 3] = [1e-2, 1e-4, 1e-6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySamples {
    pub values: Vec<f64>,
    pub passed: bool,
}

/// Both boundary limits of the criterion's hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDecay {
    pub lambda: DecaySamples,
    pub pi: DecaySamples,
}

impl BoundaryDecay {
    pub fn passed(&self) -> bool {
        self.lambda.passed && self.pi.passed
    }
}

/// Evaluates `f` at [`DECAY_SAMPLES`] and accepts a strictly decreasing
/// sequence that at least halves.
pub fn decay_samples<F>(f: F) -> Result<DecaySamples, KernelError>
where
    F: Fn(f64) -> Result<f64, KernelError>,
{
    let values = DECAY_SAMPLES.iter().map(|&t| f(t)).collect::<Result<Vec<_>, _>>()?;
    let decreasing = values.windows(2).all(|w| w[1].abs() < w[0].abs());
    let passed = decreasing && values[2].abs() < 0.5 * values[0].abs();
    Ok(DecaySamples { values, passed })
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.family, f)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Bernardi { c } => write!(f, "bernardi c={}", fmt_num(*c)),
            Family::Komatu { c, delta } => write!(f, "komatu c={} delta={}", fmt_num(*c), fmt_num(*delta)),
            Family::Hohlov { a, b, c } => write!(f, "hohlov a={} b={} c={}", fmt_num(*a), fmt_num(*b), fmt_num(*c)),
            Family::TwoParamLog { a, b } => write!(f, "twoparam a={} b={}", fmt_num(*a), fmt_num(*b)),
            Family::AliSingh { k } => write!(f, "alisingh k={}", fmt_num(*k)),
            Family::GeneralizedOmega { a, b, c, omega } => {
                write!(f, "generalized A={} B={} C={}", fmt_num(*a), fmt_num(*b), fmt_num(*c))?;
                for (i, x) in omega.iter().enumerate() {
                    write!(f, " x{}={}", i + 1, fmt_num(*x))?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Family {
    type Err = KernelError;

    /// `family key=value …`, e.g. `komatu c=0 delta=3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut words = s.split_whitespace();
        let name = words.next().ok_or_else(|| KernelError::Parse("empty kernel description".into()))?;
        let mut pairs: Vec<(String, f64)> = Vec::new();
        for w in words {
            let (k, v) =
                w.split_once('=').ok_or_else(|| KernelError::Parse(format!("expected key=value, found `{w}`")))?;
            let v: f64 =
                v.parse().map_err(|_| KernelError::Parse(format!("`{v}` is not a decimal number (key `{k}`)")))?;
            if pairs.iter().any(|(p, _)| p == k) {
                return Err(KernelError::Parse(format!("key `{k}` given twice")));
            }
            pairs.push((k.to_string(), v));
        }
        fn take_opt(pairs: &mut Vec<(String, f64)>, key: &str) -> Option<f64> {
            let i = pairs.iter().position(|(k, _)| k == key)?;
            Some(pairs.remove(i).1)
        }
        let mut take = |key: &str| -> Result<f64, KernelError> {
            take_opt(&mut pairs, key).ok_or_else(|| KernelError::Parse(format!("{name}: missing `{key}`")))
        };
        let family = match name.to_ascii_lowercase().as_str() {
            "bernardi" => Family::Bernardi { c: take("c")? },
            "komatu" => Family::Komatu { c: take("c")?, delta: take("delta")? },
            "hohlov" => Family::Hohlov { a: take("a")?, b: take("b")?, c: take("c")? },
            "twoparam" | "two-param-log" | "pons" => Family::TwoParamLog { a: take("a")?, b: take("b")? },
            "alisingh" | "ali-singh" => Family::AliSingh { k: take("k")? },
            "generalized" | "generalized-omega" => {
                let (a, b, c) = (take("A")?, take("B")?, take("C")?);
                let mut omega = Vec::new();
                for n in 1..=MAX_OMEGA_TERMS {
                    if let Some(x) = take_opt(&mut pairs, &format!("x{n}")) {
                        omega.resize(n, 0.0);
                        omega[n - 1] = x;
                    }
                }
                Family::GeneralizedOmega { a, b, c, omega }
            }
            other => return Err(KernelError::Parse(format!("unknown kernel family `{other}`"))),
        };
        if let Some((k, _)) = pairs.first() {
            return Err(KernelError::Parse(format!("{name}: unexpected key `{k}`")));
        }
        Ok(family)
    }
}

impl FromStr for KernelSpec {
    type Err = KernelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        KernelSpec::new(s.parse()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn density_examples() {
        let u = KernelSpec::uniform();
        assert!(close(u.density(0.3).unwrap(), 1.0, 1e-15));
        let k = KernelSpec::ali_singh(0.0).unwrap();
        assert!(close(k.density(0.5).unwrap(), 9.0 / 8.0, 1e-15));
        let k = KernelSpec::two_param_log(0.0, 0.0).unwrap();
        assert!(close(k.density((-1f64).exp()).unwrap(), 1.0, 1e-15));
        assert!(u.density(0.0).is_err() && u.density(1.0).is_err());
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(KernelSpec::komatu(-1.0, 2.0).is_err());
        assert!(KernelSpec::komatu(0.0, 0.0).is_err());
        assert!(KernelSpec::ali_singh(1.0).is_err());
        assert!(KernelSpec::two_param_log(-1.5, 0.0).is_err());
        assert!(KernelSpec::hohlov(1.0, -1.0, 4.0).is_err());
        assert!(KernelSpec::generalized(0.0, 1.0, 3.0, vec![-1.0]).is_err());
    }

    #[test]
    fn moments_match_quadrature_oracle() {
        let kernels = [
            KernelSpec::bernardi(1.0).unwrap(),
            KernelSpec::komatu(0.0, 3.0).unwrap(),
            KernelSpec::komatu(-0.5, 2.5).unwrap(),
            KernelSpec::two_param_log(-0.5, 0.0).unwrap(),
            KernelSpec::two_param_log(0.0, 0.0).unwrap(),
            KernelSpec::ali_singh(0.3).unwrap(),
        ];
        for k in &kernels {
            for n in [1usize, 2, 5, 17] {
                let oracle = integrate(
                    |t| if t <= 0.0 || t >= 1.0 { 0.0 } else { k.density(t).unwrap() * t.powi(n as i32) },
                    0.0,
                    1.0,
                    QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 4000 },
                )
                .unwrap()
                .value;
                assert!(close(k.moment(n).unwrap(), oracle, 1e-9), "{k} n={n}");
            }
        }
        assert!(close(KernelSpec::komatu(0.0, 3.0).unwrap().moment(1).unwrap(), 0.125, 1e-15));
        assert!(close(KernelSpec::two_param_log(0.0, 0.0).unwrap().moment(2).unwrap(), 1.0 / 9.0, 1e-15));
    }

    #[test]
    fn hohlov_moments_are_hypergeometric_coefficients() {
        for &(a, b, c) in &[(1.0, 1.0, 4.0), (0.5, 0.8, 4.0), (2.0, 1.0, 5.5)] {
            let k = KernelSpec::hohlov(a, b, c).unwrap();
            let mut coef = 1.0;
            for n in 1..=12 {
                let m = (n - 1) as f64;
                coef *= (a + m) * (b + m) / ((c + m) * (m + 1.0));
                assert!(close(k.moment(n).unwrap(), coef, 1e-9), "({a},{b},{c}) n={n}");
            }
        }
        let k = KernelSpec::hohlov(1.0, 1.0, 4.0).unwrap();
        assert!(close(k.density(0.25).unwrap(), 3.0 * 0.75 * 0.75, 1e-12));
    }

    #[test]
    fn generalized_moments_are_beta_sums() {
        use statrs::function::beta::beta;
        let (a, b, c) = (0.5, 0.8, 4.0);
        let omega = vec![0.3, 0.0, 1.2];
        let k = KernelSpec::generalized(a, b, c, omega.clone()).unwrap();
        let s = c - a - b;
        let mass = |n: f64| {
            let mut m = beta(b + n, s + 1.0);
            for (i, x) in omega.iter().enumerate() {
                m += x * beta(b + n, s + 2.0 + i as f64);
            }
            m
        };
        assert!(close(k.normalizer(), 1.0 / mass(0.0), 1e-10));
        for n in [1usize, 3, 9] {
            assert!(close(k.moment(n).unwrap(), mass(n as f64) / mass(0.0), 1e-9));
        }
    }

    #[test]
    fn log_derivative_ratio_matches_finite_differences() {
        let kernels = [
            KernelSpec::bernardi(1.5).unwrap(),
            KernelSpec::komatu(0.0, 3.0).unwrap(),
            KernelSpec::komatu(-0.3, 4.0).unwrap(),
            KernelSpec::two_param_log(-0.5, 0.0).unwrap(),
            KernelSpec::two_param_log(0.0, 0.0).unwrap(),
            KernelSpec::two_param_log(-0.3, -0.3).unwrap(),
            KernelSpec::ali_singh(0.4).unwrap(),
            KernelSpec::hohlov(1.0, 1.0, 4.0).unwrap(),
            KernelSpec::hohlov(0.5, 0.7, 4.5).unwrap(),
            KernelSpec::generalized(0.0, 1.0, 3.0, vec![]).unwrap(),
            KernelSpec::generalized(0.2, 0.9, 4.0, vec![0.5, 0.25]).unwrap(),
        ];
        for k in &kernels {
            for i in 0..=9 {
                let t = 0.05 + 0.1 * i as f64;
                let h = 1e-4 * t.min(1.0 - t);
                let f = |x: f64| k.density(x).unwrap();
                let d1 = (f(t + h) - f(t - h)) / (2.0 * h);
                let d2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
                if d1.abs() < 1e-6 {
                    continue;
                }
                let oracle = t * d2 / d1;
                let r = k.log_derivative_ratio(t).unwrap();
                assert!((r - oracle).abs() <= 1e-5 * oracle.abs().max(1.0), "{k} t={t}: {r} vs {oracle}");
            }
        }
    }

    #[test]
    fn closed_form_ratios() {
        let k = KernelSpec::bernardi(2.0).unwrap();
        assert!(close(k.log_derivative_ratio(0.37).unwrap(), 1.0, 1e-14));
        let u = KernelSpec::uniform();
        assert!(matches!(u.log_derivative_ratio(0.5), Err(KernelError::CriticalPoint { .. })));
    }

    #[test]
    fn envelopes_of_uniform_kernel() {
        let u = KernelSpec::uniform();
        for &t in &[0.01, 0.2, 0.5, 0.9] {
            let l: f64 = -f64::ln(t);
            assert!(close(u.lambda_envelope(1.0, t).unwrap(), l, 1e-10));
            assert!(close(u.lambda_envelope(2.0, t).unwrap(), 2.0 * (1.0 - t.sqrt()), 1e-10));
            assert!(close(u.pi_envelope(1.0, 1.0, t).unwrap(), 0.5 * l * l, 1e-10));
            assert_eq!(u.pi_envelope(0.0, 3.0, t).unwrap(), u.lambda_envelope(3.0, t).unwrap());
        }
        assert_eq!(u.lambda_envelope(2.0, 1.0).unwrap(), 0.0);
        assert_eq!(u.pi_envelope(1.0, 2.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn decay_checks() {
        let u = KernelSpec::uniform();
        assert!(u.boundary_decay_check(1.0, 1.0).unwrap().passed());
        let k = KernelSpec::komatu(0.0, 3.0).unwrap();
        assert!(k.boundary_decay_check(1.0, 2.0).unwrap().passed());
        // A density ~ 1/t gives t^{1/ν}Λ_ν(t) → ν, no decay.
        let nu = 2.0;
        let synthetic = decay_samples(|t| Ok(t.powf(1.0 / nu) * nu * (t.powf(-1.0 / nu) - 1.0))).unwrap();
        assert!(!synthetic.passed);
    }

    #[test]
    fn text_form_round_trip() {
        for s in [
            "komatu c=0 delta=3",
            "bernardi c=1",
            "hohlov a=1 b=1 c=4",
            "twoparam a=-0.5 b=0",
            "alisingh k=0.25",
            "generalized A=0 B=1 C=3 x1=0.5 x3=2",
        ] {
            let k: KernelSpec = s.parse().unwrap();
            let again: KernelSpec = k.to_string().parse().unwrap();
            assert_eq!(k, again, "{s}");
        }
        assert_eq!(
            "generalized A=0 B=1 C=3 x1=0.5 x3=2".parse::<Family>().unwrap().to_string(),
            "generalized A=0 B=1 C=3 x1=0.5 x2=0 x3=2"
        );
        assert!("komatu c=0".parse::<Family>().is_err());
        assert!("komatu c=0 delta=3 extra=1".parse::<Family>().is_err());
        assert!("wedge c=1".parse::<Family>().is_err());
        assert!("bernardi c=one".parse::<Family>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let k = KernelSpec::komatu(0.0, 3.0).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        assert!(s.contains("\"family\":\"komatu\""));
        let back: KernelSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(k, back);
        assert!(serde_json::from_str::<KernelSpec>(r#"{"family":"ali-singh","k":2.0}"#).is_err());
    }
}
