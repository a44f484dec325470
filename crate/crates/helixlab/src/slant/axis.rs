//! Axis recovery: once a curve passes the constant-angle test, the fixed
//! direction itself can be reconstructed two independent ways.
//!
//! * [`recover_axis_from_g`] assembles the direction from the coefficient
//!   sequence and the moving frame at every grid point and averages; the
//!   per-point scatter is a consistency check, not an input.
//! * [`oracle_axis_svd`] ignores the coefficient machinery entirely: a fixed
//!   direction at constant angle to the second frame vector must annihilate
//!   `V_2'(s) = -kappa_1 V_1 + kappa_2 V_3` for all `s`, so it sits in the
//!   nullspace of the matrix stacking those vectors. This is the independent
//!   cross-check the detector's acceptance comparisons lean on.

use nalgebra::{DMatrix, DVector};

use crate::error::{HelixError, Result};
use crate::frenet::FrenetApparatus;
use crate::scalar::{approx_f64, real, Real};
use crate::slant::gsequence::GSequence;
use crate::tol;

/// Result of the nullspace search: the candidate direction (if the smallest
/// singular value is decisively separated) and the realized angle profile
/// `arccos <V_2(s), U>` along the grid.
#[derive(Debug, Clone)]
pub struct AxisOracle<T> {
    pub axis: Option<DVector<T>>,
    pub angles: Vec<T>,
    pub sigma_min: T,
    pub sigma_max: T,
}

/// Reconstructs the fixed direction as `cos(theta) * sum_i G_i(s) V_i(s)`,
/// averaged over the grid.
///
/// Errors with `AxisUnstable` when the per-point directions scatter beyond
/// [`tol::AXIS_SPREAD_TOL`], or when the averaged vector's norm strays from 1
/// by more than [`tol::AXIS_NORM_TOL`] before the final normalization.
pub fn recover_axis_from_g<T: Real>(
    g: &GSequence<T>,
    app: &FrenetApparatus<T>,
    theta: T,
) -> Result<DVector<T>> {
    let n = app.dimension();
    let m = app.len();
    if g.dimension() != n || g.len() != m {
        return Err(HelixError::InvalidArgument(
            "coefficient sequence and apparatus are not aligned".into(),
        ));
    }
    let profiles = g.profiles()?;
    let cos_theta = theta.cos();

    let mut points: Vec<DVector<T>> = Vec::with_capacity(m);
    let mut mean = DVector::<T>::zeros(n);
    for j in 0..m {
        let coeffs = DVector::<T>::from_iterator(n, profiles.iter().map(|p| p[j]));
        // rows of the frame are V_1..V_n, so F^T maps coefficients to space
        let u = app.frames()[j].transpose() * coeffs * cos_theta;
        mean += &u;
        points.push(u);
    }
    mean /= real::<T>(m as f64);

    let mut spread = T::zero();
    for u in &points {
        spread = spread.max((u - &mean).norm());
    }
    if spread > real::<T>(tol::AXIS_SPREAD_TOL) {
        return Err(HelixError::AxisUnstable {
            spread: approx_f64(spread),
            tolerance: tol::AXIS_SPREAD_TOL,
        });
    }
    let norm = mean.norm();
    if (norm - T::one()).abs() > real::<T>(tol::AXIS_NORM_TOL) {
        return Err(HelixError::AxisUnstable {
            spread: approx_f64((norm - T::one()).abs()),
            tolerance: tol::AXIS_NORM_TOL,
        });
    }
    Ok(mean / norm)
}

/// Searches for a fixed direction orthogonal to `V_2'` everywhere, via SVD of
/// the stacked (unit-normalized) derivative directions.
///
/// Returns no axis when the smallest singular value is not separated from the
/// largest by [`tol::SVD_NULL_RATIO`]; errors with `AmbiguousNullspace` when
/// the two smallest singular values sit within a factor of 10 of each other
/// (the nullspace is then not one-dimensional and no single axis exists).
pub fn oracle_axis_svd<T: Real>(app: &FrenetApparatus<T>) -> Result<AxisOracle<T>> {
    let n = app.dimension();
    let m = app.len();
    if m < n + 2 {
        return Err(HelixError::InvalidArgument(format!(
            "nullspace oracle needs at least {} grid points for dimension {n}, got {m}",
            n + 2
        )));
    }

    let mut rows = DMatrix::<T>::zeros(m, n);
    let scale = real::<T>(1.0 / (m as f64).sqrt());
    for j in 0..m {
        let mut r = app.frame_vector(j, 1) * (-app.curvature(1)[j]);
        if n >= 3 {
            r += app.frame_vector(j, 3) * app.curvature(2)[j];
        }
        let norm = r.norm();
        if !(norm > real::<T>(tol::EPS_CURVATURE)) {
            return Err(HelixError::InvalidArgument(format!(
                "second frame vector is stationary at grid point {j}; no angle constraint"
            )));
        }
        rows.row_mut(j).tr_copy_from(&(r * (scale / norm)));
    }

    let svd = rows.svd(false, true);
    let sv = &svd.singular_values;
    let v_t = svd
        .v_t
        .as_ref()
        .expect("right singular vectors were requested");

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| {
        sv[a]
            .partial_cmp(&sv[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let i_min = order[0];
    let sigma_min = sv[i_min];
    let sigma_max = sv[order[order.len() - 1]];

    if sigma_min > sigma_max * real::<T>(tol::SVD_NULL_RATIO) {
        return Ok(AxisOracle {
            axis: None,
            angles: Vec::new(),
            sigma_min,
            sigma_max,
        });
    }
    if order.len() > 1 {
        // the nullspace must be one-dimensional to name an axis: the
        // second-smallest value failing the same null test, or sitting within
        // a factor ten of the smallest, leaves the direction undetermined
        let sigma_next = sv[order[1]];
        if sigma_next <= sigma_min * real::<T>(10.0)
            || sigma_next <= sigma_max * real::<T>(tol::SVD_NULL_RATIO)
        {
            return Err(HelixError::AmbiguousNullspace {
                sigma_min: approx_f64(sigma_min),
                sigma_next: approx_f64(sigma_next),
            });
        }
    }

    let mut axis = v_t.row(i_min).transpose();

    // fix the sign deterministically: mean <V_2, U> made nonnegative, and if
    // that is degenerate (the orthogonal-axis case), the first sizable
    // component made positive
    let mut mean_dot = T::zero();
    for j in 0..m {
        mean_dot += app.frame_vector(j, 2).dot(&axis);
    }
    mean_dot /= real::<T>(m as f64);
    if mean_dot < -real::<T>(1e-12) {
        axis = -axis;
    } else if mean_dot.abs() <= real::<T>(1e-12) {
        if let Some(k) = (0..n).find(|&k| axis[k].abs() > real::<T>(1e-8)) {
            if axis[k] < T::zero() {
                axis = -axis;
            }
        }
    }

    let angles = (0..m)
        .map(|j| {
            let d = app.frame_vector(j, 2).dot(&axis);
            d.max(-T::one()).min(T::one()).acos()
        })
        .collect();

    Ok(AxisOracle {
        axis: Some(axis),
        angles,
        sigma_min,
        sigma_max,
    })
}
