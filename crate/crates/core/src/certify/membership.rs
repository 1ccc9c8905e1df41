use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functional::DiskGrid;
use super::{CertifyError, CirclePoint, MEMBERSHIP_TAIL_LIMIT};
use crate::accel::richardson;
use crate::series::{TruncatedSeries, BOUNDARY_RADII};

/// `|K(z)|` below this multiple of `Σ|aₙ||z|ⁿ` counts as a zero.
const ZERO_RELATIVE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    /// Minimum of `Re(zK′/K) − σ` over the grid.
    pub min_margin: f64,
    pub argmin: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sharpness {
    /// `|extrapolated − σ|`.
    pub residual: f64,
    pub extrapolated: f64,
    /// `Re(zK′/K)` at `z = −ρ` for each boundary radius.
    pub estimates: Vec<f64>,
}

fn abs_sum(k: &TruncatedSeries, r: f64) -> f64 {
    k.coeffs().iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

fn ratio(k: &TruncatedSeries, zk: &TruncatedSeries, z: Complex64) -> Result<Complex64, CertifyError> {
    let den = k.horner(z);
    if den.norm() <= ZERO_RELATIVE * abs_sum(k, z.norm()) {
        return Err(CertifyError::ZeroDenominator { z });
    }
    Ok(zk.horner(z) / den)
}

fn membership_series(f: &TruncatedSeries, xi: f64, radius: f64) -> Result<TruncatedSeries, CertifyError> {
    if !f.is_normalized() {
        return Err(CertifyError::DomainError("membership needs a normalized function (a0 = 0, a1 = 1)".into()));
    }
    let k = f.k_combination(xi);
    let bound = k.tail_bound(radius);
    if !(bound < MEMBERSHIP_TAIL_LIMIT) {
        return Err(CertifyError::TailTooLarge { bound, radius, limit: MEMBERSHIP_TAIL_LIMIT });
    }
    Ok(k)
}

/// Minimum over the grid of `Re(zK′/K) − σ` with `K = ξzF′ + (1−ξ)F`.
pub fn verify_membership(
    f: &TruncatedSeries,
    sigma: f64,
    xi: f64,
    grid: &DiskGrid,
) -> Result<Membership, CertifyError> {
    grid.validate()?;
    let k = membership_series(f, xi, grid.max_radius())?;
    let zk = k.z_derivative();
    let values = grid
        .points()
        .into_par_iter()
        .map(|z| Ok((ratio(&k, &zk, z)?.re - sigma, z)))
        .collect::<Result<Vec<_>, CertifyError>>()?;
    let (min_margin, argmin) =
        values.into_iter().fold((f64::INFINITY, Complex64::default()), |acc, v| if v.0 < acc.0 { v } else { acc });
    Ok(Membership { min_margin, argmin })
}

/// `Re(zK′/K)` around one circle.
pub fn circle_profile(
    f: &TruncatedSeries,
    xi: f64,
    radius: f64,
    angles: usize,
) -> Result<Vec<CirclePoint>, CertifyError> {
    let k = membership_series(f, xi, radius)?;
    let zk = k.z_derivative();
    (0..angles)
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / angles as f64;
            let z = Complex64::from_polar(radius, theta);
            Ok(CirclePoint { theta, re_ratio: ratio(&k, &zk, z)?.re })
        })
        .collect()
}

/// `Re(zK′/K)` at `z = −ρ` from averaged partial sums, extrapolated to
/// `ρ = 1` in `h = 1 − ρ`; the residual is the distance to `σ`.
pub fn verify_sharpness(k: &TruncatedSeries, sigma: f64) -> Result<Sharpness, CertifyError> {
    let zk = k.z_derivative();
    let mut estimates = Vec::with_capacity(BOUNDARY_RADII.len());
    for rho in BOUNDARY_RADII {
        let z = Complex64::new(-rho, 0.0);
        let den = k.averaged_value(z);
        if den.norm() <= ZERO_RELATIVE * abs_sum(k, rho) {
            return Err(CertifyError::ZeroDenominator { z });
        }
        estimates.push((zk.averaged_value(z) / den).re);
    }
    let h: Vec<f64> = BOUNDARY_RADII.iter().map(|rho| 1.0 - rho).collect();
    let e = richardson(&h, &estimates, f64::abs);
    if e.last_correction > e.first_correction && e.last_correction > 1e-10 {
        return Err(CertifyError::ExtrapolationUnstable { first: e.first_correction, last: e.last_correction });
    }
    Ok(Sharpness { residual: (e.value - sigma).abs(), extrapolated: e.value, estimates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Majorant;

    fn small_grid() -> DiskGrid {
        DiskGrid { radii: vec![0.3, 0.6, 0.8], angles: 64, epsilon_count: 4 }
    }

    #[test]
    fn identity_has_margin_one_minus_sigma() {
        let f = TruncatedSeries::identity(8);
        for xi in [0.0, 0.5, 1.0] {
            let m = verify_membership(&f, 0.2, xi, &DiskGrid::default()).unwrap();
            assert!((m.min_margin - 0.8).abs() < 1e-14);
        }
        let s = verify_sharpness(&f, 0.3).unwrap();
        assert!((s.residual - 0.7).abs() < 1e-14);
    }

    #[test]
    fn koebe_half_plane() {
        // F = z/(1−z): zF′/F = 1/(1−z), real part > 1/2.
        let mut c = vec![0.0];
        c.extend(std::iter::repeat_n(1.0, 200));
        let f = TruncatedSeries::from_real(&c, Majorant { scale: 1.0, power: 0.0 }).unwrap();
        let m = verify_membership(&f, 0.0, 0.0, &small_grid()).unwrap();
        assert!(m.min_margin > 0.5, "{m:?}");
        // Minimum of Re 1/(1−z) on |z| = 0.8 is 1/1.8 at z = −0.8.
        assert!((m.min_margin - 1.0 / 1.8).abs() < 1e-12);
        assert!((m.argmin + Complex64::new(0.8, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn membership_errors() {
        let f = TruncatedSeries::from_real(&[0.0, 1.0, 1.0], Majorant::ZERO).unwrap();
        assert!(verify_membership(&f, 0.0, 0.0, &small_grid()).is_ok());
        // z(1 + z/0.6) vanishes at z = −0.6, a grid point.
        let g = TruncatedSeries::from_real(&[0.0, 1.0, 1.0 / 0.6], Majorant::ZERO).unwrap();
        assert!(matches!(verify_membership(&g, 0.0, 0.0, &small_grid()), Err(CertifyError::ZeroDenominator { .. })));
        let h = TruncatedSeries::from_real(&[0.0, 2.0], Majorant::ZERO).unwrap();
        assert!(matches!(verify_membership(&h, 0.0, 0.0, &small_grid()), Err(CertifyError::DomainError(_))));
        let big = TruncatedSeries::from_real(&[0.0, 1.0], Majorant { scale: 1.0, power: 0.0 }).unwrap();
        assert!(matches!(
            verify_membership(&big, 0.0, 0.0, &DiskGrid::default()),
            Err(CertifyError::TailTooLarge { .. })
        ));
    }

    #[test]
    fn circle_profile_matches_membership() {
        let mut c = vec![0.0];
        c.extend(std::iter::repeat_n(1.0, 200));
        let f = TruncatedSeries::from_real(&c, Majorant { scale: 1.0, power: 0.0 }).unwrap();
        let prof = circle_profile(&f, 0.0, 0.8, 64).unwrap();
        let min = prof.iter().map(|p| p.re_ratio).fold(f64::INFINITY, f64::min);
        let m = verify_membership(&f, 0.0, 0.0, &DiskGrid { radii: vec![0.8], angles: 64, epsilon_count: 1 }).unwrap();
        assert_eq!(min, m.min_margin);
    }
}
