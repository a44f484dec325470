//! The three-dimensional constant-angle invariant.
//!
//! In dimension 3 the constant-angle property of the principal normal has a
//! classical scalar witness: the geodesic curvature of the spherical image of
//! the normal,
//!
//! ```text
//! sigma = kappa_1^2 / (kappa_1^2 + kappa_2^2)^(3/2) * (kappa_2 / kappa_1)'
//! ```
//!
//! which is constant exactly for curves with the property, and relates to the
//! sum-of-squares constant by `|sigma| = 1 / sqrt(C - 1)`.

use crate::error::{HelixError, Result};
use crate::grid;
use crate::scalar::{approx_f64, real, Real};
use crate::slant::gsequence::GSequence;
use crate::tol;

/// Evaluates the invariant on tabulated curvature profiles over a uniform
/// grid; the ratio derivative uses the fourth-order stencils.
pub fn sigma_profile<T: Real>(s: &[T], kappa1: &[T], kappa2: &[T]) -> Result<Vec<T>> {
    let m = s.len();
    if kappa1.len() != m || kappa2.len() != m {
        return Err(HelixError::InvalidArgument(
            "curvature profiles and grid must have equal length".into(),
        ));
    }
    if m < 5 {
        return Err(HelixError::InvalidArgument(format!(
            "invariant needs at least 5 grid points, got {m}"
        )));
    }
    // the first curvature sits in a denominator and is positive for any frame
    // produced by orthonormalization, so demand strict positivity
    let eps = real::<T>(tol::EPS_CURVATURE);
    for j in 0..m {
        if kappa1[j] <= eps {
            return Err(HelixError::CurvatureVanishes {
                index: 1,
                s: approx_f64(s[j]),
                value: approx_f64(kappa1[j]),
            });
        }
    }
    let h = s[1] - s[0];
    let ratio: Vec<T> = (0..m).map(|j| kappa2[j] / kappa1[j]).collect();
    let d_ratio = grid::derivative(&ratio, h)?;
    Ok((0..m)
        .map(|j| {
            let k1 = kappa1[j];
            let k2 = kappa2[j];
            let denom = (k1 * k1 + k2 * k2).powf(real::<T>(1.5));
            k1 * k1 / denom * d_ratio[j]
        })
        .collect())
}

/// Checks that the invariant magnitude matches `1/sqrt(C - 1)` with `C` read
/// off the coefficient sequence. Returns the largest pointwise mismatch.
///
/// Errors with `CExcluded` when `C <= 1 +` [`tol::C_MARGIN`]: at `C = 1` the
/// relation has no finite value and the fixed direction would be the plane
/// normal of a planar curve.
pub fn check_sigma_equivalence<T: Real>(g: &GSequence<T>, sigma: &[T]) -> Result<T> {
    if sigma.len() != g.len() {
        return Err(HelixError::InvalidArgument(
            "invariant profile and coefficient grid must have equal length".into(),
        ));
    }
    let (_, c) = g.defect_and_mean()?;
    let margin = real::<T>(tol::C_MARGIN);
    if c <= T::one() + margin {
        return Err(HelixError::CExcluded {
            c: approx_f64(c),
            margin: tol::C_MARGIN,
        });
    }
    let expected = (c - T::one()).sqrt().recip();
    Ok(sigma.iter().fold(T::zero(), |worst, &sg| {
        worst.max((sg.abs() - expected).abs())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frenet::FrenetApparatus;
    use crate::grid::midpoint_grid;
    use crate::slant::gsequence::{compute_g_basis, solve_integration_constant};
    use nalgebra::DMatrix;

    #[test]
    fn sinusoidal_pair_gives_constant_invariant() {
        let (w, mu) = (2.0, 1.0);
        let (s, _) = midpoint_grid::<f64>(0.3, 2.8, 1000);
        let k1: Vec<f64> = s.iter().map(|&x| w * (mu * x).sin()).collect();
        let k2: Vec<f64> = s.iter().map(|&x| w * (mu * x).cos()).collect();
        let sigma = sigma_profile(&s, &k1, &k2).unwrap();
        for &sg in &sigma {
            assert!((sg - (-mu / w)).abs() < 1e-6, "sigma {sg}");
        }
    }

    #[test]
    fn constant_curvatures_give_zero() {
        let (s, _) = midpoint_grid::<f64>(0.0, 5.0, 64);
        let k1 = vec![0.12; s.len()];
        let k2 = vec![0.16; s.len()];
        let sigma = sigma_profile(&s, &k1, &k2).unwrap();
        // the stencil applied to a constant vector cancels to rounding, not
        // to exact zero: inexact coefficient thirds leave ~1e-16/h residue
        assert!(sigma.iter().all(|&sg| sg.abs() < 1e-13));
    }

    #[test]
    fn proportional_curvatures_give_zero() {
        let (s, _) = midpoint_grid::<f64>(0.1, 2.1, 64);
        let k1: Vec<f64> = s.iter().map(|&x| 1.0 + 0.5 * (2.0 * x).sin()).collect();
        let k2: Vec<f64> = k1.iter().map(|&k| 3.0 * k).collect();
        let sigma = sigma_profile(&s, &k1, &k2).unwrap();
        assert!(sigma.iter().all(|&sg| sg.abs() < 1e-10));
    }

    #[test]
    fn vanishing_first_curvature_is_rejected() {
        let (s, _) = midpoint_grid::<f64>(0.0, 2.0, 64);
        let k1: Vec<f64> = s.iter().map(|&x| x - 1.0).collect();
        let k2 = vec![1.0; s.len()];
        assert!(matches!(
            sigma_profile(&s, &k1, &k2),
            Err(HelixError::CurvatureVanishes { index: 1, .. })
        ));
    }

    #[test]
    fn invariant_matches_the_sum_of_squares_constant() {
        let (w, mu) = (2.0_f64, 1.0_f64);
        let (s, h) = midpoint_grid(0.3, 2.8, 1000);
        let m = s.len();
        let k1: Vec<f64> = s.iter().map(|&x| w * (mu * x).sin()).collect();
        let k2: Vec<f64> = s.iter().map(|&x| w * (mu * x).cos()).collect();
        let frames = vec![DMatrix::<f64>::identity(3, 3); m];
        let app = FrenetApparatus::from_tabulated(
            2.5,
            s.clone(),
            h,
            frames,
            vec![k1.clone(), k2.clone()],
        )
        .unwrap();
        let g = compute_g_basis(&app).unwrap();
        let c0 = solve_integration_constant(&g);
        let g = g.with_constant(c0);
        let sigma = sigma_profile(&s, &k1, &k2).unwrap();
        let residual = check_sigma_equivalence(&g, &sigma).unwrap();
        // |sigma| = 1/2 and C = 1 + w^2/mu^2 = 5, so 1/sqrt(C-1) = 1/2
        assert!(residual < 1e-6, "residual {residual:.3e}");
    }

    #[test]
    fn near_unit_constant_is_excluded() {
        let (s, h) = midpoint_grid(0.0, 1.0, 64);
        let m = s.len();
        // q = 0 everywhere and p holding only G_2 = 1: the sum of squares is
        // identically 1, the excluded constant
        let p = vec![vec![0.0; m], vec![1.0; m]];
        let q = vec![vec![0.0; m], vec![0.0; m]];
        let g = GSequence::from_parts(s, h, p, q).with_constant(0.0);
        let sigma = vec![0.0; m];
        assert!(matches!(
            check_sigma_equivalence(&g, &sigma),
            Err(HelixError::CExcluded { .. })
        ));
    }
}
