//! Integral transforms `V_λ(f)` of analytic functions in the unit disk:
//! kernels and their moments, auxiliary functions, truncated power series,
//! and the checks that certify when the transform of the class `W_β(α,γ)`
//! lies in the Pascu class `M(σ,ξ)`, including the sharp value of `β`.
//!
//! ```
//! use pascu_core::{beta_sharp, KernelSpec, ParameterSet};
//!
//! let kernel = KernelSpec::komatu(0.0, 3.0).unwrap();
//! let params = ParameterSet::from_mu_nu(1.0, 2.0, 0.1, 1.0).unwrap();
//! let beta = beta_sharp(&kernel, &params).unwrap().beta;
//! assert!(beta < 1.0);
//! ```

// Negated comparisons reject NaN on purpose; quadrature nodes are quoted
// at their published precision.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod accel;
pub mod auxfun;
pub mod certify;
pub mod kernels;
pub mod params;
pub mod quad;
pub mod report;
pub mod series;

pub use auxfun::{AuxContext, AuxError, PfqError};
pub use certify::{
    beta0_hohlov_closed_form, beta_sharp, certify, check_growth_condition, check_monotone_condition, condition_grid,
    m_functional_min, phi_t_monotonicity_probe, verify_membership, verify_sharpness, BetaSolution, CertificationReport,
    CertifyError, CertifyOptions, DiskGrid, MFunctional, Margin, Membership, Sharpness,
};
pub use kernels::{Family, KernelError, KernelSpec};
pub use num_complex::Complex64;
pub use params::{hypothesis_check, HypothesisReport, ParamError, ParameterSet, TheoremId};
pub use series::{extremal_function, EvalMode, Majorant, SeriesError, TruncatedSeries};
