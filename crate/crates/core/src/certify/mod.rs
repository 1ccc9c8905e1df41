//! Sharp β, the M-functional criterion, the sufficient conditions, and
//! numerical membership and sharpness checks, assembled into a
//! [`CertificationReport`].

mod beta;
mod conditions;
mod functional;
mod membership;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::auxfun::{AuxError, PfqError};
use crate::kernels::{BoundaryDecay, Family, KernelError, KernelSpec};
use crate::params::{hypothesis_check, HypothesisReport, ParamError, ParameterSet, TheoremId};
use crate::quad::QuadError;
use crate::series::{extremal_function, SeriesError, TruncatedSeries};

pub use beta::{beta0_hohlov_closed_form, beta_from_integral, beta_sharp, BetaSolution};
pub use conditions::{
    check_growth_condition, check_monotone_condition, condition_grid, growth_margins, min_slope, monotone_expression,
    phi_t, phi_t_monotonicity_probe, ProbeResult,
};
pub use functional::{m_functional_min, DiskGrid, MFunctional, MFunctionalTable};
pub use membership::{verify_membership, verify_sharpness, Membership, Sharpness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Aux(#[from] AuxError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Hypergeometric(#[from] PfqError),
    #[error("quadrature: {0}")]
    Quadrature(#[from] QuadError),
    #[error("beta routes disagree: quadrature {integral}, series {series}")]
    RepresentationMismatch { integral: f64, series: f64 },
    #[error("beta is unbounded: the integral equals {value} (needs != 1)")]
    BetaUnbounded { value: f64 },
    #[error("M-functional quadrature unreliable at z = {z}: error {error:e} vs scale {scale:e}")]
    QuadratureFailure { z: Complex64, error: f64, scale: f64 },
    #[error("boundary limits of the envelopes do not decay: {0:?}")]
    BoundaryDecay(Box<BoundaryDecay>),
    #[error("{0}")]
    DomainError(String),
    #[error("K(z) vanishes at z = {z}")]
    ZeroDenominator { z: Complex64 },
    #[error("series tail bound {bound:e} at radius {radius} exceeds {limit:e}")]
    TailTooLarge { bound: f64, radius: f64, limit: f64 },
    #[error("boundary extrapolation unstable: corrections {first:e} then {last:e}")]
    ExtrapolationUnstable { first: f64, last: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// A signed condition margin, or a marker that the condition does not apply
/// to the parameters (for instance `ξ = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Margin {
    Value(f64),
    NotApplicable,
}

impl Margin {
    pub fn value(self) -> Option<f64> {
        match self {
            Margin::Value(v) => Some(v),
            Margin::NotApplicable => None,
        }
    }

    pub fn is_satisfied(self, tol: f64) -> Option<bool> {
        self.value().map(|v| v >= -tol)
    }
}

impl fmt::Display for Margin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Margin::Value(v) => write!(f, "{v}"),
            Margin::NotApplicable => f.write_str("NotApplicable"),
        }
    }
}

impl Serialize for Margin {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Margin::Value(v) => s.serialize_f64(*v),
            Margin::NotApplicable => s.serialize_str("NotApplicable"),
        }
    }
}

impl<'de> Deserialize<'de> for Margin {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Margin::Value(v)),
            Raw::Text(s) if s == "NotApplicable" => Ok(Margin::NotApplicable),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("invalid margin `{s}`"))),
        }
    }
}

/// Tunables of a certification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Initial truncation order of the extremal series.
    pub order: usize,
    /// The order is doubled up to this cap until the tail bound is small.
    pub max_order: usize,
    pub grid: DiskGrid,
    /// Acceptance tolerance for the M-functional minimum.
    pub tolerance: f64,
    /// Acceptance tolerance for the membership margin.
    pub membership_tolerance: f64,
    /// Acceptance bound for the sharpness residual.
    pub sharpness_tolerance: f64,
    pub plot_data: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            order: 512,
            max_order: 1 << 15,
            grid: DiskGrid::default(),
            tolerance: 1e-6,
            membership_tolerance: 1e-3,
            sharpness_tolerance: 1e-2,
            plot_data: false,
        }
    }
}

/// Tail bound the membership check requires at the outermost radius.
pub const MEMBERSHIP_TAIL_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub t: f64,
    pub pi: f64,
    pub l_at_argmin: f64,
    pub monotone: Margin,
    pub growth: Margin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CirclePoint {
    pub theta: f64,
    pub re_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub curves: Vec<PlotRow>,
    pub circle: Vec<CirclePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub params: ParameterSet,
    pub kernel: KernelSpec,
    pub hypotheses: Vec<HypothesisReport>,
    pub beta_integral: f64,
    pub beta_series: f64,
    pub beta_closed_form: Option<f64>,
    pub boundary_decay: BoundaryDecay,
    pub m_functional: MFunctional,
    pub condition_margins: BTreeMap<String, Margin>,
    pub membership: Membership,
    pub sharpness: Sharpness,
    pub order: usize,
    pub notes: Vec<String>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub plot: Option<PlotData>,
}

fn condition_margin(r: Result<Margin, CertifyError>, name: &str, notes: &mut Vec<String>) -> Margin {
    match r {
        Ok(m) => m,
        Err(e) => {
            notes.push(format!("{name}: {e}"));
            Margin::NotApplicable
        }
    }
}

/// Moments `τ_0..=τ_N` and the transformed sharp extremal function at an
/// order large enough for the membership tail bound.
fn transformed_extremal(
    kernel: &KernelSpec,
    params: &ParameterSet,
    beta: f64,
    opts: &CertifyOptions,
    notes: &mut Vec<String>,
) -> Result<TruncatedSeries, CertifyError> {
    let radius = opts.grid.max_radius();
    let mut order = opts.order.max(2);
    loop {
        let moments = kernel.moments(order)?;
        let f = extremal_function(params.mu, params.nu, beta, order);
        let big_f = f.apply_transform(&moments)?;
        let bound = big_f.k_combination(params.xi).tail_bound(radius);
        if bound < MEMBERSHIP_TAIL_LIMIT || order >= opts.max_order {
            if order != opts.order {
                notes.push(format!("series order raised from {} to {order} (tail bound {bound:.3e})", opts.order));
            }
            return Ok(big_f);
        }
        order = (order * 2).min(opts.max_order);
    }
}

/// Runs every check for one kernel and parameter set.
pub fn certify(
    kernel: &KernelSpec,
    params: &ParameterSet,
    opts: &CertifyOptions,
) -> Result<CertificationReport, CertifyError> {
    opts.grid.validate()?;
    let mut notes = Vec::new();
    let mut hypotheses = vec![hypothesis_check(TheoremId::Criterion, params, kernel)?];
    let family_theorem = TheoremId::for_family(kernel.family());
    for theorem in [TheoremId::Monotone, TheoremId::Growth, family_theorem] {
        if !hypotheses.iter().any(|h| h.theorem == theorem) {
            hypotheses.push(hypothesis_check(theorem, params, kernel)?);
        }
    }

    let beta = beta_sharp(kernel, params)?;
    let beta_closed_form = match kernel.family() {
        Family::Hohlov { a, b, c } if *a == 1.0 && params.xi > 0.0 => match beta0_hohlov_closed_form(params, *b, *c) {
            Ok(v) => Some(v),
            Err(e) => {
                notes.push(format!("closed-form beta: {e}"));
                None
            }
        },
        _ => None,
    };
    let params = params.with_beta(beta.beta);

    let boundary_decay = kernel.boundary_decay_check(params.mu, params.nu)?;
    let table = MFunctionalTable::new(kernel, &params)?;
    let m_functional = table.minimum(&params, &opts.grid)?;

    let grid = condition_grid();
    let mut condition_margins = BTreeMap::new();
    condition_margins.insert(
        TheoremId::Monotone.name().to_string(),
        condition_margin(check_monotone_condition(kernel, &params, &grid), "monotone", &mut notes),
    );
    condition_margins.insert(
        TheoremId::Growth.name().to_string(),
        condition_margin(check_growth_condition(kernel, &params, &grid), "growth", &mut notes),
    );

    let big_f = transformed_extremal(kernel, &params, beta.beta, opts, &mut notes)?;
    let order = big_f.order();
    let membership = verify_membership(&big_f, params.sigma, params.xi, &opts.grid)?;
    let sharpness = verify_sharpness(&big_f.k_combination(params.xi), params.sigma)?;

    let plot = if opts.plot_data {
        Some(plot_data(kernel, &params, &table, &m_functional, &big_f, &opts.grid, &grid)?)
    } else {
        None
    };

    let passed = boundary_decay.passed()
        && m_functional.min >= -opts.tolerance
        && membership.min_margin >= -opts.membership_tolerance
        && sharpness.residual <= opts.sharpness_tolerance;

    Ok(CertificationReport {
        params,
        kernel: kernel.clone(),
        hypotheses,
        beta_integral: beta.beta_integral,
        beta_series: beta.beta_series,
        beta_closed_form,
        boundary_decay,
        m_functional,
        condition_margins,
        membership,
        sharpness,
        order,
        notes,
        passed,
        plot,
    })
}

fn plot_data(
    kernel: &KernelSpec,
    params: &ParameterSet,
    table: &MFunctionalTable,
    m: &MFunctional,
    big_f: &TruncatedSeries,
    disk: &DiskGrid,
    t_grid: &[f64],
) -> Result<PlotData, CertifyError> {
    let ctx = crate::auxfun::AuxContext::from_params(params)?.with_epsilon(m.argmin_epsilon)?;
    let monotone = conditions::monotone_curve(kernel, params, t_grid);
    let growth = growth_margins(kernel, params, t_grid).ok();
    let mut curves = Vec::with_capacity(t_grid.len());
    for (i, &t) in t_grid.iter().enumerate() {
        curves.push(PlotRow {
            t,
            pi: table.envelope(kernel, params, t)?,
            l_at_argmin: ctx.l_integrand(m.argmin_z, t)?,
            monotone: monotone.as_ref().map_or(Margin::NotApplicable, |v| Margin::Value(v[i])),
            growth: growth.as_ref().map_or(Margin::NotApplicable, |v| Margin::Value(v[i])),
        });
    }
    let circle = membership::circle_profile(big_f, params.xi, disk.max_radius(), disk.angles)?;
    Ok(PlotData { curves, circle })
}
