//! Independent consistency checks on the coefficient sequence: a first-order
//! differential identity, an integral reconstruction, and an algebraic
//! telescoping identity. The first two hold exactly when the curve has the
//! constant-angle property; the last holds for every curve and acts as a
//! structural self-check of the recursion.

use nalgebra::{DMatrix, DVector};

use crate::error::{HelixError, Result};
use crate::frenet::FrenetApparatus;
use crate::grid;
use crate::scalar::{real, Real};
use crate::slant::gsequence::GSequence;

/// Residual of `G_n' = -kappa_{n-1} G_{n-1}`, the closing identity of the
/// constant-angle system: max over the grid interior of the defect,
/// normalized by the peak magnitude of the right side over the same range.
///
/// The first and last few samples are excluded from both maxima. The
/// coefficient recursion stacks grid derivatives — one per level past the
/// third, plus the closing derivative taken here — and near the boundary
/// each of those falls back to one-sided stencils whose error constants are
/// several times the central one. Each nesting also drags the contaminated
/// zone inward by the central half-width, so the band grows with dimension;
/// past it the stencils are clean and the residual reflects the curve, not
/// the boundary. On grids too short to have an interior the full range is
/// used.
pub fn differential_characterization_residual<T: Real>(
    g: &GSequence<T>,
    app: &FrenetApparatus<T>,
) -> Result<T> {
    align(g, app)?;
    let n = g.dimension();
    let gn = g.profile(n)?;
    let gn1 = g.profile(n - 1)?;
    let k_last = app.curvature(n - 1);
    let d_gn = grid::derivative(&gn, g.step())?;
    let m = g.len();
    // one-sided zone (2) + central half-width (2) per nested derivative:
    // n - 3 inside the recursion, one more for d_gn
    let band = (2 + 2 * (n - 2)).min(m.saturating_sub(5) / 2);
    let mut worst = T::zero();
    let mut scale = T::zero();
    for j in band..m - band {
        let rhs = k_last[j] * gn1[j];
        worst = worst.max((d_gn[j] + rhs).abs());
        scale = scale.max(rhs.abs());
    }
    Ok(worst / scale.max(real::<T>(1e-30)))
}

/// Everything the integral reconstruction produces: the phase, the fitted
/// constants, the two combinations that must be constant for a genuine
/// constant-angle curve, and the reconstruction residual of `G_{n-1}`.
#[derive(Debug, Clone)]
pub struct IntegralCheck<T> {
    /// Cumulative integral of the last curvature, from the grid start.
    pub phase: Vec<T>,
    /// Fitted constants of the reconstruction.
    pub a: T,
    pub b: T,
    /// The two profiles that collapse to `a` and `b` for a genuine
    /// constant-angle curve.
    pub m_profile: Vec<T>,
    pub n_profile: Vec<T>,
    pub m_std: T,
    pub n_std: T,
    /// Max reconstruction error of `G_{n-1}`, relative to its peak magnitude.
    pub residual: T,
}

/// Reconstructs `G_{n-1}` from the phase of the last curvature:
///
/// ```text
/// phi = integral of kappa_{n-1}
/// G_{n-1} = (A - Is) sin(phi) - (B + Ic) cos(phi)
/// ```
///
/// with `Is`, `Ic` the cumulative integrals of `kappa_{n-2} G_{n-2}` times
/// `sin(phi)`, `cos(phi)`. `A` and `B` come from a least-squares fit; the two
/// profiles `m`, `n` restate the same identity as quantities that must be
/// constant, and their standard deviations are reported alongside.
pub fn integral_characterization<T: Real>(
    g: &GSequence<T>,
    app: &FrenetApparatus<T>,
) -> Result<IntegralCheck<T>> {
    align(g, app)?;
    let n = g.dimension();
    if n < 3 {
        return Err(HelixError::InvalidArgument(
            "integral reconstruction needs dimension at least 3".into(),
        ));
    }
    let m = g.len();
    let h = g.step();
    let gn = g.profile(n)?;
    let gn1 = g.profile(n - 1)?;
    let gn2 = g.profile(n - 2)?;
    let k_last = app.curvature(n - 1);
    let k_prev = app.curvature(n - 2);

    let phase = grid::cumulative_integral(k_last, h)?;
    let sin_phi: Vec<T> = phase.iter().map(|&p| p.sin()).collect();
    let cos_phi: Vec<T> = phase.iter().map(|&p| p.cos()).collect();

    let drive: Vec<T> = (0..m).map(|j| k_prev[j] * gn2[j]).collect();
    let is: Vec<T> = grid::cumulative_integral(
        &(0..m).map(|j| drive[j] * sin_phi[j]).collect::<Vec<_>>(),
        h,
    )?;
    let ic: Vec<T> = grid::cumulative_integral(
        &(0..m).map(|j| drive[j] * cos_phi[j]).collect::<Vec<_>>(),
        h,
    )?;

    // least squares for the two constants: the reconstruction rearranges to
    //   G_{n-1} + Is sin(phi) + Ic cos(phi) = A sin(phi) - B cos(phi)
    let design = DMatrix::<T>::from_fn(m, 2, |j, c| if c == 0 { sin_phi[j] } else { -cos_phi[j] });
    let target = DVector::<T>::from_fn(m, |j, _| gn1[j] + is[j] * sin_phi[j] + ic[j] * cos_phi[j]);
    let svd = design.svd(true, true);
    let sol = svd
        .solve(&target, real::<T>(1e-14))
        .map_err(|e| HelixError::InvalidArgument(format!("phase fit failed: {e}")))?;
    let (a, b) = (sol[0], sol[1]);

    let m_profile: Vec<T> = (0..m)
        .map(|j| gn[j] * cos_phi[j] + gn1[j] * sin_phi[j] + is[j])
        .collect();
    let n_profile: Vec<T> = (0..m)
        .map(|j| gn[j] * sin_phi[j] - gn1[j] * cos_phi[j] - ic[j])
        .collect();

    let mut worst = T::zero();
    let mut scale = T::zero();
    for j in 0..m {
        let rec = (a - is[j]) * sin_phi[j] - (b + ic[j]) * cos_phi[j];
        worst = worst.max((rec - gn1[j]).abs());
        scale = scale.max(gn1[j].abs());
    }

    Ok(IntegralCheck {
        phase,
        a,
        b,
        m_std: grid::std_dev(&m_profile),
        n_std: grid::std_dev(&n_profile),
        m_profile,
        n_profile,
        residual: worst / scale.max(real::<T>(1e-30)),
    })
}

/// Residual of the identity `sum_{i<=n-2} G_i G_i' = kappa_{n-2} G_{n-2}
/// G_{n-1}`, which holds for every curve. The derivatives reuse the exact
/// values `G_1' = kappa_1`, `G_2' = 0` and the grid stencil for the rest --
/// the same ingredients the recursion itself used -- so the discrete identity
/// holds to rounding and any violation indicates a structural bug rather
/// than discretization error.
pub fn telescoping_identity_residual<T: Real>(
    g: &GSequence<T>,
    app: &FrenetApparatus<T>,
) -> Result<T> {
    align(g, app)?;
    let n = g.dimension();
    if n < 3 {
        return Err(HelixError::InvalidArgument(
            "telescoping identity needs dimension at least 3".into(),
        ));
    }
    let m = g.len();
    let k1 = app.curvature(1);
    let g1 = g.profile(1)?;
    let mut sum: Vec<T> = (0..m).map(|j| g1[j] * k1[j]).collect();
    for i in 3..=n - 2 {
        let gi = g.profile(i)?;
        let dgi = grid::derivative(&gi, g.step())?;
        for j in 0..m {
            sum[j] += gi[j] * dgi[j];
        }
    }
    let gn1 = g.profile(n - 1)?;
    let gn2 = g.profile(n - 2)?;
    let k_prev = app.curvature(n - 2);
    let mut worst = T::zero();
    let mut scale = T::zero();
    for j in 0..m {
        let rhs = k_prev[j] * gn2[j] * gn1[j];
        worst = worst.max((sum[j] - rhs).abs());
        scale = scale.max(rhs.abs());
    }
    Ok(worst / scale.max(real::<T>(1e-30)))
}

fn align<T: Real>(g: &GSequence<T>, app: &FrenetApparatus<T>) -> Result<()> {
    if g.dimension() != app.dimension() || g.len() != app.len() {
        return Err(HelixError::InvalidArgument(
            "coefficient sequence and apparatus are not aligned".into(),
        ));
    }
    Ok(())
}
