use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CertifyError;
use crate::auxfun::AuxContext;
use crate::kernels::KernelSpec;
use crate::params::ParameterSet;
use crate::quad::CompositeRule;

/// Sampling plan for `z ∈ 𝔻` (circles × equispaced angles) and for `ε` on
/// the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskGrid {
    pub radii: Vec<f64>,
    pub angles: usize,
    pub epsilon_count: usize,
}

impl Default for DiskGrid {
    fn default() -> Self {
        DiskGrid { radii: vec![0.5, 0.9, 0.99, 0.999], angles: 256, epsilon_count: 64 }
    }
}

impl DiskGrid {
    pub fn validate(&self) -> Result<(), CertifyError> {
        if self.radii.is_empty() {
            return Err(CertifyError::InvalidGrid("no radii".into()));
        }
        if !self.radii.iter().all(|r| *r > 0.0 && *r < 1.0) {
            return Err(CertifyError::InvalidGrid("radii must lie in (0, 1)".into()));
        }
        if !self.radii.windows(2).all(|w| w[0] < w[1]) {
            return Err(CertifyError::InvalidGrid("radii must be strictly increasing".into()));
        }
        if self.angles == 0 || self.epsilon_count == 0 {
            return Err(CertifyError::InvalidGrid("angle and epsilon counts must be positive".into()));
        }
        Ok(())
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.last().copied().unwrap_or(0.0)
    }

    /// All grid points, circle by circle, angles increasing from 0.
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.radii.len() * self.angles);
        for &r in &self.radii {
            for j in 0..self.angles {
                out.push(Complex64::from_polar(r, 2.0 * PI * j as f64 / self.angles as f64));
            }
        }
        out
    }

    pub fn epsilons(&self) -> Vec<Complex64> {
        (0..self.epsilon_count)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / self.epsilon_count as f64))
            .collect()
    }
}

/// Minimum of the M-functional over a [`DiskGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MFunctional {
    pub min: f64,
    pub argmin_z: Complex64,
    pub argmin_epsilon: Complex64,
    /// Quadrature error estimate at the minimizer.
    pub error: f64,
}

/// The weight `t^{1/μ−1}Π_{μ,ν}(t)` (or `t^{1/α−1}Λ_α(t)` when `γ = 0`)
/// tabulated on a fixed composite rule, so that the functional can be
/// evaluated for many `(z, ε, σ, ξ)` at the cost of one sum each.
#[derive(Debug, Clone)]
pub struct MFunctionalTable {
    rule: CompositeRule,
    weight: Vec<f64>,
}

/// Relative quadrature error above which a functional value is rejected.
const REL_QUAD_LIMIT: f64 = 1e-6;

impl MFunctionalTable {
    pub fn new(kernel: &KernelSpec, params: &ParameterSet) -> Result<Self, CertifyError> {
        let (mu, nu) = (params.mu, params.nu);
        // Near 0 the weight behaves like t^{p−1}; enough decades make the
        // omitted mass below about 1e-13.
        let (s0, _) = kernel.endpoint_exponents();
        let p = (1.0 / nu).min(s0 + 1.0);
        let left = ((13.0 / p).ceil() as u32).clamp(13, 150);
        let rule = CompositeRule::graded(left, 13, 4, 8);
        let weight =
            rule.nodes().par_iter().map(|&t| Self::weight_at(kernel, mu, nu, t)).collect::<Result<Vec<_>, _>>()?;
        Ok(MFunctionalTable { rule, weight })
    }

    fn weight_at(kernel: &KernelSpec, mu: f64, nu: f64, t: f64) -> Result<f64, CertifyError> {
        let e = if mu > 0.0 { 1.0 / mu - 1.0 } else { 1.0 / nu - 1.0 };
        Ok(t.powf(e) * kernel.pi_envelope(mu, nu, t)?)
    }

    /// `Π_{μ,ν}(t)` (for plotting).
    pub fn envelope(&self, kernel: &KernelSpec, params: &ParameterSet, t: f64) -> Result<f64, CertifyError> {
        Ok(kernel.pi_envelope(params.mu, params.nu, t)?)
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    /// `(M0, M1, error)` with `M(z, ε) = M0 + Re(ε M1)`.
    pub fn parts(&self, ctx: &AuxContext, z: Complex64) -> Result<(f64, Complex64, f64), CertifyError> {
        let n = self.weight.len();
        let (mut v0, mut v1r, mut v1i, mut abs) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for (i, (&t, &w)) in self.rule.nodes().iter().zip(&self.weight).enumerate() {
            let (l0, l1) = ctx.l_parts(z, t)?;
            v0[i] = w * l0;
            v1r[i] = w * l1.re;
            v1i[i] = w * l1.im;
            abs[i] = w.abs() * (l0.abs() + l1.norm());
        }
        let (m0, e0) = self.rule.apply(&v0);
        let (m1r, e1r) = self.rule.apply(&v1r);
        let (m1i, e1i) = self.rule.apply(&v1i);
        let (scale, _) = self.rule.apply(&abs);
        let error = e0 + e1r + e1i;
        if error > 1e-12 + REL_QUAD_LIMIT * scale {
            return Err(CertifyError::QuadratureFailure { z, error, scale });
        }
        Ok((m0, Complex64::new(m1r, m1i), error))
    }

    /// `M(z)` at the context's `ε`.
    pub fn value(&self, ctx: &AuxContext, z: Complex64) -> Result<f64, CertifyError> {
        let (m0, m1, _) = self.parts(ctx, z)?;
        Ok(m0 + (ctx.epsilon() * m1).re)
    }

    /// Minimum over the grid's `z` and `ε` samples, together with the exact
    /// minimum over `|ε| = 1`, which is attained at `ε = −conj(M1)/|M1|`.
    pub fn minimum(&self, params: &ParameterSet, grid: &DiskGrid) -> Result<MFunctional, CertifyError> {
        grid.validate()?;
        let ctx = AuxContext::from_params(params)?;
        let eps = grid.epsilons();
        let per_z = grid
            .points()
            .into_par_iter()
            .map(|z| {
                let (m0, m1, err) = self.parts(&ctx, z)?;
                let mut best = MFunctional { min: f64::INFINITY, argmin_z: z, argmin_epsilon: eps[0], error: err };
                for &e in &eps {
                    let v = m0 + (e * m1).re;
                    if v < best.min {
                        best.min = v;
                        best.argmin_epsilon = e;
                    }
                }
                let r = m1.norm();
                if r > 0.0 && m0 - r < best.min {
                    best.min = m0 - r;
                    best.argmin_epsilon = -m1.conj() / r;
                }
                Ok(best)
            })
            .collect::<Result<Vec<_>, CertifyError>>()?;
        Ok(per_z.into_iter().fold(
            MFunctional { min: f64::INFINITY, argmin_z: Complex64::default(), argmin_epsilon: eps[0], error: 0.0 },
            |acc, m| if m.min < acc.min { m } else { acc },
        ))
    }
}

/// Minimum of `∫₀¹ t^{1/μ−1}Π_{μ,ν}(t) L_{σ,ξ,z}(t) dt` over the grid.
pub fn m_functional_min(
    kernel: &KernelSpec,
    params: &ParameterSet,
    grid: &DiskGrid,
) -> Result<MFunctional, CertifyError> {
    let decay = kernel.boundary_decay_check(params.mu, params.nu)?;
    if !decay.passed() {
        return Err(CertifyError::BoundaryDecay(Box::new(decay)));
    }
    MFunctionalTable::new(kernel, params)?.minimum(params, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};

    #[test]
    fn grid_validation() {
        assert!(DiskGrid::default().validate().is_ok());
        let bad = DiskGrid { radii: vec![0.9, 0.5], angles: 8, epsilon_count: 4 };
        assert!(bad.validate().is_err());
        let bad = DiskGrid { radii: vec![0.5, 1.0], angles: 8, epsilon_count: 4 };
        assert!(bad.validate().is_err());
        let g = DiskGrid { radii: vec![0.5], angles: 4, epsilon_count: 2 };
        assert_eq!(g.points().len(), 4);
        assert!((g.points()[2] + Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn functional_at_origin_matches_direct_quadrature() {
        let k = KernelSpec::uniform();
        let p = ParameterSet::from_mu_nu(1.0, 1.0, 0.0, 0.5).unwrap();
        let table = MFunctionalTable::new(&k, &p).unwrap();
        let ctx = AuxContext::from_params(&p).unwrap();
        let z = Complex64::default();
        // Π(t) = log²(1/t)/2; at z = 0 the h-terms are 1.
        let oracle = integrate(
            |t: f64| {
                if t <= 0.0 {
                    return 0.0;
                }
                let l = -t.ln();
                0.5 * l * l * ctx.l_integrand(z, t).unwrap()
            },
            0.0,
            1.0,
            QuadOptions { abs_tol: 1e-12, rel_tol: 1e-11, max_intervals: 4000 },
        )
        .unwrap()
        .value;
        let v = table.value(&ctx, z).unwrap();
        assert!((v - oracle).abs() < 1e-9, "{v} vs {oracle}");
    }

    #[test]
    fn exact_epsilon_minimum_beats_samples() {
        let k = KernelSpec::komatu(0.0, 3.0).unwrap();
        let p = ParameterSet::from_mu_nu(1.0, 2.0, 0.1, 1.0).unwrap();
        let table = MFunctionalTable::new(&k, &p).unwrap();
        let grid = DiskGrid { radii: vec![0.9], angles: 16, epsilon_count: 8 };
        let m = table.minimum(&p, &grid).unwrap();
        let ctx = AuxContext::from_params(&p).unwrap().with_epsilon(m.argmin_epsilon).unwrap();
        assert!((table.value(&ctx, m.argmin_z).unwrap() - m.min).abs() < 1e-12);
        for e in (DiskGrid { radii: vec![0.9], angles: 1, epsilon_count: 720 }).epsilons() {
            let c = ctx.with_epsilon(e).unwrap();
            assert!(table.value(&c, m.argmin_z).unwrap() >= m.min - 1e-12);
        }
    }
}
