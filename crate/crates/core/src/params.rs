//! Scalar parameter algebra: `(α, γ) → (μ, ν)`, the admissible σ range and
//! the hypothesis predicates of the inclusion theorems.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::{Family, KernelSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("no admissible (mu, nu) for alpha = {alpha}, gamma = {gamma}")]
    NoRealRoots { alpha: f64, gamma: f64 },
    #[error("{0}")]
    DomainError(String),
    #[error("kernel family `{family}` does not match theorem `{theorem}`")]
    MismatchedFamily { family: String, theorem: TheoremId },
}

/// Real nonnegative roots of `x² − (α−γ)x + γ = 0`, ordered `μ ≤ ν`.
pub fn resolve_mu_nu(alpha: f64, gamma: f64) -> Result<(f64, f64), ParamError> {
    if !(alpha >= 0.0 && gamma >= 0.0) {
        return Err(ParamError::DomainError(format!("alpha and gamma must be nonnegative (got {alpha}, {gamma})")));
    }
    if gamma == 0.0 {
        return Ok((0.0, alpha));
    }
    let s = alpha - gamma;
    let disc = s * s - 4.0 * gamma;
    if s < 0.0 || disc < 0.0 {
        return Err(ParamError::NoRealRoots { alpha, gamma });
    }
    let nu = 0.5 * (s + disc.sqrt());
    // Product form for the small root avoids cancellation.
    let mu = gamma / nu;
    Ok((mu.min(nu), mu.max(nu)))
}

/// Upper end of the σ range, `(1/2)(1/μ − 1/ν)/(1 + 1/μ − 1/ν)`.
pub fn sigma_upper_bound(mu: f64, nu: f64) -> Result<f64, ParamError> {
    if !(mu >= 1.0) {
        return Err(ParamError::DomainError(format!("sigma bound needs mu >= 1 (got {mu})")));
    }
    if !(nu >= mu) {
        return Err(ParamError::DomainError(format!("sigma bound needs nu >= mu (got {nu} < {mu})")));
    }
    let d = 1.0 / mu - 1.0 / nu;
    Ok(0.5 * d / (1.0 + d))
}

/// The full scalar configuration of one certification problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub alpha: f64,
    pub gamma: f64,
    pub mu: f64,
    pub nu: f64,
    pub sigma: f64,
    pub xi: f64,
    pub beta: Option<f64>,
}

impl ParameterSet {
    pub fn from_alpha_gamma(alpha: f64, gamma: f64, sigma: f64, xi: f64) -> Result<Self, ParamError> {
        let (mu, nu) = resolve_mu_nu(alpha, gamma)?;
        Self::build(alpha, gamma, mu, nu, sigma, xi)
    }

    /// Builds from `(μ, ν)` directly; the pair is reordered so `μ ≤ ν`.
    pub fn from_mu_nu(mu: f64, nu: f64, sigma: f64, xi: f64) -> Result<Self, ParamError> {
        if !(mu >= 0.0 && nu >= 0.0) {
            return Err(ParamError::DomainError(format!("mu and nu must be nonnegative (got {mu}, {nu})")));
        }
        let (mu, nu) = (mu.min(nu), mu.max(nu));
        let gamma = mu * nu;
        let alpha = mu + nu + gamma;
        Self::build(alpha, gamma, mu, nu, sigma, xi)
    }

    fn build(alpha: f64, gamma: f64, mu: f64, nu: f64, sigma: f64, xi: f64) -> Result<Self, ParamError> {
        if !(nu > 0.0) {
            return Err(ParamError::DomainError("nu must be positive (alpha > 0)".into()));
        }
        if !(0.0..1.0).contains(&sigma) {
            return Err(ParamError::DomainError(format!("sigma must lie in [0, 1) (got {sigma})")));
        }
        if !(0.0..=1.0).contains(&xi) {
            return Err(ParamError::DomainError(format!("xi must lie in [0, 1] (got {xi})")));
        }
        Ok(ParameterSet { alpha, gamma, mu, nu, sigma, xi, beta: None })
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    /// `γ > 0`, i.e. both `μ` and `ν` positive.
    pub fn is_two_parameter(&self) -> bool {
        self.mu > 0.0
    }

    /// `1/ξ + 2/μ − 1/ν`, the combination shared by the kernel theorems.
    pub fn kernel_combination(&self) -> f64 {
        1.0 / self.xi + 2.0 / self.mu - 1.0 / self.nu
    }

    /// Right-hand constant `1/ξ − 2 + 2/μ − 1/ν` of the growth condition.
    pub fn growth_constant(&self) -> f64 {
        self.kernel_combination() - 2.0
    }
}

/// The inclusion theorems whose hypotheses can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    /// Necessary and sufficient criterion via the M-functional.
    Criterion,
    /// Monotonicity sufficient condition on the Π envelope.
    Monotone,
    /// Growth sufficient condition on `tλ''/λ'`.
    Growth,
    Generalized,
    Hohlov,
    HohlovCorollary,
    Komatu,
    TwoParamLog,
    AliSingh,
}

impl TheoremId {
    pub const ALL: [TheoremId; 9] = [
        TheoremId::Criterion,
        TheoremId::Monotone,
        TheoremId::Growth,
        TheoremId::Generalized,
        TheoremId::Hohlov,
        TheoremId::HohlovCorollary,
        TheoremId::Komatu,
        TheoremId::TwoParamLog,
        TheoremId::AliSingh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::Criterion => "criterion",
            TheoremId::Monotone => "monotone",
            TheoremId::Growth => "growth",
            TheoremId::Generalized => "generalized",
            TheoremId::Hohlov => "hohlov",
            TheoremId::HohlovCorollary => "hohlov-corollary",
            TheoremId::Komatu => "komatu",
            TheoremId::TwoParamLog => "two-param-log",
            TheoremId::AliSingh => "ali-singh",
        }
    }

    /// The theorem specialised to a kernel family, if any.
    pub fn for_family(family: &Family) -> TheoremId {
        match family {
            Family::Komatu { .. } => TheoremId::Komatu,
            Family::Hohlov { a, .. } if *a == 1.0 => TheoremId::HohlovCorollary,
            Family::Hohlov { .. } => TheoremId::Hohlov,
            Family::TwoParamLog { .. } => TheoremId::TwoParamLog,
            Family::AliSingh { .. } => TheoremId::AliSingh,
            Family::GeneralizedOmega { .. } => TheoremId::Generalized,
            Family::Bernardi { .. } => TheoremId::Growth,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name() == key)
            .ok_or_else(|| ParamError::DomainError(format!("unknown theorem `{s}`")))
    }
}

/// One displayed hypothesis with its signed margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub satisfied: bool,
    pub margin: f64,
    /// The computed quantity the hypothesis constrains.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub theorem: TheoremId,
    pub hypotheses: Vec<Hypothesis>,
}

impl HypothesisReport {
    pub fn all_satisfied(&self) -> bool {
        self.hypotheses.iter().all(|h| h.satisfied)
    }

    pub fn min_margin(&self) -> f64 {
        self.hypotheses.iter().map(|h| h.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn get(&self, name: &str) -> Option<&Hypothesis> {
        self.hypotheses.iter().find(|h| h.name == name)
    }
}

// Tolerance for hypotheses stated as equalities.
const EQUALITY_TOL: f64 = 1e-12;

struct Builder(Vec<Hypothesis>);

impl Builder {
    /// `value ≥ bound`
    fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        let margin = value - bound;
        self.0.push(Hypothesis { name: name.into(), satisfied: margin >= 0.0, margin, value });
    }

    /// `value ≤ bound`
    fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        let margin = bound - value;
        self.0.push(Hypothesis { name: name.into(), satisfied: margin >= 0.0, margin, value });
    }

    /// `value > bound`; a zero margin is a failure.
    fn above(&mut self, name: &str, value: f64, bound: f64) {
        let margin = value - bound;
        self.0.push(Hypothesis { name: name.into(), satisfied: margin > 0.0, margin, value });
    }

    /// `value < bound`; a zero margin is a failure.
    fn below(&mut self, name: &str, value: f64, bound: f64) {
        let margin = bound - value;
        self.0.push(Hypothesis { name: name.into(), satisfied: margin > 0.0, margin, value });
    }

    fn equals(&mut self, name: &str, value: f64, target: f64) {
        let margin = -(value - target).abs();
        self.0.push(Hypothesis { name: name.into(), satisfied: -margin <= EQUALITY_TOL, margin, value });
    }

    fn sigma_range(&mut self, p: &ParameterSet) {
        self.at_least("sigma >= 0", p.sigma, 0.0);
        if p.mu >= 1.0 {
            let bound = sigma_upper_bound(p.mu, p.nu).expect("mu >= 1 and nu >= mu");
            self.at_most("sigma <= sigma_bound", p.sigma, bound);
        } else {
            // The bound is undefined; report the μ ≥ 1 shortfall instead.
            self.0.push(Hypothesis {
                name: "sigma <= sigma_bound".into(),
                satisfied: false,
                margin: p.mu - 1.0,
                value: p.sigma,
            });
        }
    }

    fn kernel_frame(&mut self, p: &ParameterSet) {
        self.above("gamma > 0", p.gamma, 0.0);
        self.at_least("mu >= 1", p.mu, 1.0);
    }
}

/// Evaluates every displayed hypothesis of `theorem` for `params`/`kernel`.
pub fn hypothesis_check(
    theorem: TheoremId,
    params: &ParameterSet,
    kernel: &KernelSpec,
) -> Result<HypothesisReport, ParamError> {
    let p = params;
    let mut b = Builder(Vec::new());
    let mismatch = || ParamError::MismatchedFamily { family: kernel.family().name().into(), theorem };
    match theorem {
        TheoremId::Criterion => {
            b.at_least("sigma >= 0", p.sigma, 0.0);
            b.below("sigma < 1", p.sigma, 1.0);
            b.at_least("xi >= 0", p.xi, 0.0);
            b.at_most("xi <= 1", p.xi, 1.0);
            if let Some(beta) = p.beta {
                b.below("beta < 1", beta, 1.0);
            }
        }
        TheoremId::Monotone => {
            b.at_least("sigma >= 0", p.sigma, 0.0);
            b.at_most("sigma <= 1/2", p.sigma, 0.5);
            b.at_least("mu >= 1", p.mu, 1.0);
            b.above("xi > 0", p.xi, 0.0);
            b.at_most("xi <= 1", p.xi, 1.0);
        }
        TheoremId::Growth => {
            b.kernel_frame(p);
            b.sigma_range(p);
            b.above("xi > 0", p.xi, 0.0);
            b.at_most("xi <= 1", p.xi, 1.0);
        }
        TheoremId::Generalized => {
            let Family::GeneralizedOmega { a, b: bb, c, .. } = kernel.family() else {
                return Err(mismatch());
            };
            b.kernel_frame(p);
            b.at_least("xi >= 0", p.xi, 0.0);
            b.at_most("xi <= 1", p.xi, 1.0);
            b.at_most("B <= 1", *bb, 1.0);
            b.at_least("C >= A + 3", *c, a + 3.0);
            b.at_least("1/xi + 2/mu - 1/nu >= 2", p.kernel_combination(), 2.0);
            b.sigma_range(p);
        }
        TheoremId::Hohlov => {
            let Family::Hohlov { a, b: bb, c } = kernel.family() else {
                return Err(mismatch());
            };
            b.above("a > 0", *a, 0.0);
            b.above("b > 0", *bb, 0.0);
            b.above("c > 0", *c, 0.0);
            b.kernel_frame(p);
            b.at_least("c >= a + 3", *c, a + 3.0);
            b.at_most("b <= 1", *bb, 1.0);
            b.at_least("1/xi + 2/mu - 1/nu >= 2", p.kernel_combination(), 2.0);
            b.sigma_range(p);
        }
        TheoremId::HohlovCorollary => {
            let Family::Hohlov { a, b: bb, c } = kernel.family() else {
                return Err(mismatch());
            };
            b.equals("a = 1", *a, 1.0);
            b.above("b > 0", *bb, 0.0);
            b.kernel_frame(p);
            b.at_least("c >= 4", *c, 4.0);
            b.at_most("b <= 1", *bb, 1.0);
            b.at_least("1/xi + 2/mu - 1/nu >= 2", p.kernel_combination(), 2.0);
            b.sigma_range(p);
        }
        TheoremId::Komatu => {
            let Family::Komatu { c, delta } = kernel.family() else {
                return Err(mismatch());
            };
            b.above("c > -1", *c, -1.0);
            b.at_most("c <= 0", *c, 0.0);
            b.at_least("delta >= 3 - c", *delta, 3.0 - c);
            b.kernel_frame(p);
            b.at_least("1/xi + 2/mu - 1/nu >= 2", p.kernel_combination(), 2.0);
            b.sigma_range(p);
        }
        TheoremId::TwoParamLog => {
            let Family::TwoParamLog { a, .. } = kernel.family() else {
                return Err(mismatch());
            };
            b.kernel_frame(p);
            b.above("xi > 0", p.xi, 0.0);
            b.at_most("xi <= 1", p.xi, 1.0);
            b.above("a > -1", *a, -1.0);
            b.at_most("a <= 0", *a, 0.0);
            b.sigma_range(p);
        }
        TheoremId::AliSingh => {
            let Family::AliSingh { k } = kernel.family() else {
                return Err(mismatch());
            };
            let required = 1.0 - p.kernel_combination();
            b.kernel_frame(p);
            b.above("xi > 0", p.xi, 0.0);
            b.at_most("xi <= 1", p.xi, 1.0);
            b.at_least("k_required >= 0", required, 0.0);
            b.below("k_required < 1", required, 1.0);
            b.equals("k = 1 - 1/xi - 2/mu + 1/nu", *k, required);
            b.equals("sigma = 1/2", p.sigma, 0.5);
        }
    }
    Ok(HypothesisReport { theorem, hypotheses: b.0 })
}
