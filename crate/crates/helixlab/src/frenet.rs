//! Moving orthonormal frames along a unit-speed curve and the curvature
//! functions they define.
//!
//! The frame at a point comes from Gram-Schmidt on the derivative jet
//! `alpha', ..., alpha^(n-1)`, with the last vector chosen so the frame has
//! determinant +1. The first `n-2` curvatures are positive by construction;
//! the last one is signed.
//!
//! Curvatures are extracted exactly rather than by differencing frames: the
//! orthonormalization runs on first-order jets (each working vector carries
//! its own derivative along), so `kappa_i = <V_i', V_{i+1}>` uses the true
//! derivative of the i-th frame vector.

use nalgebra::{DMatrix, DVector};

use crate::curve::UnitSpeedCurve;
use crate::error::{HelixError, Result};
use crate::grid;
use crate::scalar::{approx_f64, real, Real};
use crate::tol;

/// Frame and curvatures at a single arc-length position.
#[derive(Debug, Clone)]
pub struct FramePoint<T> {
    /// Row `i` holds frame vector `V_{i+1}`.
    pub frame: DMatrix<T>,
    /// `kappa_1 .. kappa_{n-1}`.
    pub curvatures: Vec<T>,
}

/// First-order vector jet: a vector and its derivative in arc length.
#[derive(Clone)]
struct VecJet<T> {
    v: DVector<T>,
    d: DVector<T>,
}

/// Builds the orthonormal frame and curvatures from a derivative jet
/// `alpha'(s), ..., alpha^(n)(s)` of a unit-speed curve in dimension `n`.
///
/// The jet must contain exactly `n` vectors: the extra order beyond `n-1` is
/// what lets every curvature, including the last signed one, come out of exact
/// inner products. The optional `s` only decorates error messages.
pub fn frame_from_jet<T: Real>(jet: &[DVector<T>], s: Option<f64>) -> Result<FramePoint<T>> {
    let n = jet.first().map(|v| v.len()).unwrap_or(0);
    if n < 2 {
        return Err(HelixError::InvalidArgument(
            "frame construction needs ambient dimension at least 2".into(),
        ));
    }
    if jet.len() != n || jet.iter().any(|v| v.len() != n) {
        return Err(HelixError::InvalidArgument(format!(
            "frame construction needs the full jet alpha' .. alpha^({n}), got {} vectors",
            jet.len()
        )));
    }

    let mut basis: Vec<VecJet<T>> = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let mut v = jet[k].clone();
        let mut d = jet[k + 1].clone();
        // two passes of modified Gram-Schmidt; the second clears the rounding
        // left by the first when the jet is badly conditioned
        for _ in 0..2 {
            for b in &basis {
                let c = v.dot(&b.v);
                let cd = d.dot(&b.v) + v.dot(&b.d);
                v -= &b.v * c;
                d -= &b.v * cd + &b.d * c;
            }
        }
        let norm = v.norm();
        if !(norm > real::<T>(tol::EPS_CURVATURE)) {
            return Err(HelixError::DegenerateJet {
                vector_index: k + 1,
                pivot: approx_f64(norm),
                s,
            });
        }
        let norm_d = v.dot(&d) / norm;
        // unit vector and its derivative: d/ds (v / |v|)
        let uv = &v / norm;
        let ud = &d / norm - &v * (norm_d / (norm * norm));
        basis.push(VecJet { v: uv, d: ud });
    }

    // last frame vector: the unique unit vector completing the frame with
    // determinant +1, from cofactor expansion along the final row
    let mut vn = DVector::<T>::zeros(n);
    let mut work = DMatrix::<T>::zeros(n, n);
    for j in 0..n {
        work.fill(T::zero());
        for (r, b) in basis.iter().enumerate() {
            work.row_mut(r).tr_copy_from(&b.v);
        }
        work[(n - 1, j)] = T::one();
        vn[j] = work.clone().determinant();
    }
    let vn_norm = vn.norm();
    if !(vn_norm > real::<T>(0.5)) {
        return Err(HelixError::DegenerateJet {
            vector_index: n,
            pivot: approx_f64(vn_norm),
            s,
        });
    }
    vn /= vn_norm;

    let mut curvatures = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let next = if i + 1 < n - 1 { &basis[i + 1].v } else { &vn };
        curvatures.push(basis[i].d.dot(next));
    }

    let mut frame = DMatrix::<T>::zeros(n, n);
    for (r, b) in basis.iter().enumerate() {
        frame.row_mut(r).tr_copy_from(&b.v);
    }
    frame.row_mut(n - 1).tr_copy_from(&vn);

    Ok(FramePoint { frame, curvatures })
}

/// The frame field and curvature functions of a curve, tabulated on a uniform
/// interior grid in arc length.
#[derive(Debug, Clone)]
pub struct FrenetApparatus<T> {
    dim: usize,
    length: T,
    s: Vec<T>,
    h: T,
    frames: Vec<DMatrix<T>>,
    /// `curvatures[i]` holds `kappa_{i+1}` over the grid.
    curvatures: Vec<Vec<T>>,
}

impl<T: Real> FrenetApparatus<T> {
    /// Tabulates frames and curvatures on a midpoint grid of `grid_size`
    /// cells (raised to the minimum if below it). Verifies orthonormality,
    /// orientation, and continuity of every frame vector along the grid.
    pub fn compute(curve: &UnitSpeedCurve<T>, grid_size: usize) -> Result<Self> {
        let n = curve.dimension();
        let m = grid_size.max(tol::MIN_FRAME_GRID);
        let (s, h) = grid::midpoint_grid(T::zero(), curve.length(), m);

        let mut frames = Vec::with_capacity(m);
        let mut curvatures = vec![Vec::with_capacity(m); n - 1];
        for &sj in &s {
            let jet = curve.derivative_jet(sj, n)?;
            let point = frame_from_jet(&jet, Some(approx_f64(sj)))?;
            check_orthonormal(&point.frame, approx_f64(sj))?;
            for (i, &k) in point.curvatures.iter().enumerate() {
                curvatures[i].push(k);
            }
            frames.push(point.frame);
        }

        // an identically vanishing last curvature means the curve lives in a
        // hyperplane and should be analyzed there instead; isolated zeros of
        // kappa_{n-1} are legal and pass this check
        let max_last = grid::max_abs(&curvatures[n - 2]);
        if max_last <= real::<T>(tol::EPS_CURVATURE) {
            return Err(HelixError::DegenerateJet {
                vector_index: n,
                pivot: approx_f64(max_last),
                s: None,
            });
        }

        // continuity: no frame vector may flip between neighboring grid
        // points; a flip means a curvature sign degeneracy slipped between
        // samples and the frame field is not trustworthy
        for j in 1..m {
            for i in 0..n {
                let dot = frames[j - 1].row(i).dot(&frames[j].row(i));
                if dot <= T::zero() {
                    return Err(HelixError::DegenerateJet {
                        vector_index: i + 1,
                        pivot: approx_f64(dot),
                        s: Some(approx_f64(s[j])),
                    });
                }
            }
        }

        Ok(FrenetApparatus {
            dim: n,
            length: curve.length(),
            s,
            h,
            frames,
            curvatures,
        })
    }

    /// Assembles an apparatus from already-tabulated frames and curvatures,
    /// for producers that integrate the frame equations directly instead of
    /// differentiating a curve. Validates grid shape, orthonormality,
    /// orientation, and continuity; it does not re-derive the curvatures, so
    /// the caller vouches that they belong to the frames.
    pub fn from_tabulated(
        length: T,
        s: Vec<T>,
        h: T,
        frames: Vec<DMatrix<T>>,
        curvatures: Vec<Vec<T>>,
    ) -> Result<Self> {
        let m = s.len();
        if m < tol::MIN_FRAME_GRID || frames.len() != m {
            return Err(HelixError::InvalidArgument(format!(
                "frame tabulation needs at least {} aligned grid points, got {m} / {}",
                tol::MIN_FRAME_GRID,
                frames.len()
            )));
        }
        let n = frames[0].nrows();
        if n < 2
            || frames.iter().any(|f| f.nrows() != n || f.ncols() != n)
            || curvatures.len() != n - 1
            || curvatures.iter().any(|k| k.len() != m)
        {
            return Err(HelixError::InvalidArgument(
                "inconsistent frame or curvature tabulation shapes".into(),
            ));
        }
        for (j, f) in frames.iter().enumerate() {
            check_orthonormal(f, approx_f64(s[j]))?;
        }
        for j in 1..m {
            for i in 0..n {
                let dot = frames[j - 1].row(i).dot(&frames[j].row(i));
                if dot <= T::zero() {
                    return Err(HelixError::DegenerateJet {
                        vector_index: i + 1,
                        pivot: approx_f64(dot),
                        s: Some(approx_f64(s[j])),
                    });
                }
            }
        }
        Ok(FrenetApparatus {
            dim: n,
            length,
            s,
            h,
            frames,
            curvatures,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn grid(&self) -> &[T] {
        &self.s
    }

    pub fn step(&self) -> T {
        self.h
    }

    pub fn frames(&self) -> &[DMatrix<T>] {
        &self.frames
    }

    /// Frame vector `V_i` (1-based) at grid point `j`.
    pub fn frame_vector(&self, j: usize, i: usize) -> DVector<T> {
        assert!(
            (1..=self.dim).contains(&i),
            "frame vector index {i} out of range 1..={}",
            self.dim
        );
        self.frames[j].row(i - 1).transpose()
    }

    /// Curvature `kappa_i` (1-based, `1..=n-1`) over the whole grid.
    pub fn curvature(&self, i: usize) -> &[T] {
        assert!(
            (1..self.dim).contains(&i),
            "curvature index {i} out of range 1..={}",
            self.dim - 1
        );
        &self.curvatures[i - 1]
    }

    /// All curvatures at grid point `j`, `kappa_1 .. kappa_{n-1}`.
    pub fn curvatures_at(&self, j: usize) -> Vec<T> {
        self.curvatures.iter().map(|k| k[j]).collect()
    }

    /// Residual of the structural frame equations, measured by differencing
    /// the tabulated frame vectors and comparing against the curvature
    /// recombination of their neighbors. The differencing is the only
    /// approximation, so the residual shrinks at the order of the stencil.
    pub fn ode_residual(&self) -> Result<OdeResidual<T>> {
        let n = self.dim;
        let m = self.s.len();
        let mut per_vector_max = vec![T::zero(); n];
        let mut per_vector_rms = vec![T::zero(); n];
        for i in 0..n {
            // numeric derivative of V_{i+1} component by component
            let mut deriv = vec![DVector::<T>::zeros(n); m];
            for c in 0..n {
                let column: Vec<T> = self.frames.iter().map(|f| f[(i, c)]).collect();
                let d = grid::derivative(&column, self.h)?;
                for (j, dj) in d.into_iter().enumerate() {
                    deriv[j][c] = dj;
                }
            }
            let mut sq_acc = T::zero();
            for j in 0..m {
                let mut rhs = DVector::<T>::zeros(n);
                if i > 0 {
                    rhs -= self.frames[j].row(i - 1).transpose() * self.curvatures[i - 1][j];
                }
                if i + 1 < n {
                    rhs += self.frames[j].row(i + 1).transpose() * self.curvatures[i][j];
                }
                let r = (&deriv[j] - rhs).norm();
                per_vector_max[i] = per_vector_max[i].max(r);
                sq_acc += r * r;
            }
            per_vector_rms[i] = (sq_acc / real::<T>(m as f64)).sqrt();
        }
        let max = per_vector_max.iter().fold(T::zero(), |a, &b| a.max(b));
        Ok(OdeResidual {
            per_vector_max,
            per_vector_rms,
            max,
        })
    }

    /// Largest deviation of `sum_i <u, V_i>^2` from 1 over the grid. For a
    /// genuine orthonormal frame field this is rounding noise for any unit
    /// `u`; a defective frame (lost orthogonality, dropped span) shows up
    /// immediately.
    pub fn completeness_defect(&self, u: &DVector<T>) -> Result<T> {
        if u.len() != self.dim {
            return Err(HelixError::InvalidArgument(format!(
                "direction has dimension {}, frame has {}",
                u.len(),
                self.dim
            )));
        }
        let norm = u.norm();
        if (norm - T::one()).abs() > real::<T>(1e-10) {
            return Err(HelixError::NotUnit {
                norm: approx_f64(norm),
            });
        }
        let mut worst = T::zero();
        for f in &self.frames {
            let proj = f * u; // component i is <V_{i+1}, u>
            worst = worst.max((proj.norm_squared() - T::one()).abs());
        }
        Ok(worst)
    }

    /// Largest orthonormality defect `max |F F^T - I|` over the grid.
    pub fn orthonormality_defect(&self) -> T {
        let mut worst = T::zero();
        for f in &self.frames {
            let gram = f * f.transpose();
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let expect = if i == j { T::one() } else { T::zero() };
                    worst = worst.max((gram[(i, j)] - expect).abs());
                }
            }
        }
        worst
    }
}

/// Frame-equation residual statistics per frame vector.
#[derive(Debug, Clone)]
pub struct OdeResidual<T> {
    pub per_vector_max: Vec<T>,
    pub per_vector_rms: Vec<T>,
    pub max: T,
}

fn check_orthonormal<T: Real>(frame: &DMatrix<T>, s: f64) -> Result<()> {
    let n = frame.nrows();
    let gram = frame * frame.transpose();
    let mut defect = T::zero();
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { T::one() } else { T::zero() };
            defect = defect.max((gram[(i, j)] - expect).abs());
        }
    }
    let det = frame.clone().determinant();
    if defect > real::<T>(tol::EPS_FRAME_ORTHONORMAL) || (det - T::one()).abs() > real::<T>(1e-6) {
        return Err(HelixError::NotOrthogonal {
            defect: approx_f64(defect),
            det: approx_f64(det),
        });
    }
    let _ = s;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::AnalyticCurve;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_speed(coords: &[&str], interval: (f64, f64)) -> UnitSpeedCurve<f64> {
        AnalyticCurve::from_exprs(coords, interval)
            .unwrap()
            .arc_length_reparameterize(96)
            .unwrap()
    }

    #[test]
    fn unit_circle_frame_and_curvature() {
        let c = unit_speed(&["cos(t)", "sin(t)"], (0.0, 2.0 * PI));
        let jet = c.derivative_jet(0.0, 2).unwrap();
        let fp = frame_from_jet(&jet, None).unwrap();
        // at s = 0 the tangent is (0, 1) and the normal points inward
        assert_relative_eq!(fp.frame[(0, 0)], 0.0, epsilon = 1e-9);
        assert_relative_eq!(fp.frame[(0, 1)], 1.0, epsilon = 1e-9);
        assert_relative_eq!(fp.frame[(1, 0)], -1.0, epsilon = 1e-9);
        assert_relative_eq!(fp.frame[(1, 1)], 0.0, epsilon = 1e-9);
        assert_relative_eq!(fp.curvatures[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn helix_curvatures_are_constant() {
        // radius 3, pitch 4: curvatures 3/25 and 4/25
        let c = unit_speed(&["3*cos(t)", "3*sin(t)", "4*t"], (0.0, 2.0 * PI));
        let app = FrenetApparatus::compute(&c, 64).unwrap();
        for j in 0..app.len() {
            let k = app.curvatures_at(j);
            assert_relative_eq!(k[0], 0.12, epsilon = 1e-8);
            assert_relative_eq!(k[1], 0.16, epsilon = 1e-8);
        }
    }

    #[test]
    fn straight_line_is_degenerate() {
        let c = unit_speed(&["t", "2*t", "2*t"], (0.0, 3.0));
        let err = FrenetApparatus::compute(&c, 32).unwrap_err();
        match err {
            HelixError::DegenerateJet { vector_index, .. } => assert_eq!(vector_index, 2),
            other => panic!("expected degenerate jet, got {other}"),
        }
        let msg = format!(
            "{}",
            HelixError::DegenerateJet {
                vector_index: 2,
                pivot: 0.0,
                s: None
            }
        );
        assert!(msg.contains("kappa_1"), "message was: {msg}");
    }

    #[test]
    fn planar_circle_in_space_is_degenerate() {
        let c = unit_speed(&["cos(t)", "sin(t)", "0.0"], (0.0, 2.0 * PI));
        let err = FrenetApparatus::compute(&c, 32).unwrap_err();
        match err {
            HelixError::DegenerateJet { vector_index, .. } => assert_eq!(vector_index, 3),
            other => panic!("expected degenerate jet, got {other}"),
        }
    }

    #[test]
    fn frame_is_orthonormal_and_oriented_in_dim_four() {
        let c = unit_speed(
            &["cos(t)", "sin(t)", "0.5*cos(2*t)", "0.5*sin(2*t)"],
            (0.0, 2.0 * PI),
        );
        let app = FrenetApparatus::compute(&c, 48).unwrap();
        assert!(app.orthonormality_defect() < 1e-8);
        for f in app.frames() {
            assert_relative_eq!(f.clone().determinant(), 1.0, epsilon = 1e-8);
        }
        // first two curvatures positive everywhere
        assert!(app.curvature(1).iter().all(|&k| k > 0.0));
        assert!(app.curvature(2).iter().all(|&k| k > 0.0));
    }

    #[test]
    fn ode_residual_is_small_and_shrinks_at_fourth_order() {
        let c = unit_speed(&["3*cos(t)", "3*sin(t)", "4*t"], (0.0, 2.0 * PI));
        let coarse = FrenetApparatus::compute(&c, 64)
            .unwrap()
            .ode_residual()
            .unwrap();
        let fine = FrenetApparatus::compute(&c, 128)
            .unwrap()
            .ode_residual()
            .unwrap();
        assert!(coarse.max < 1e-5, "coarse residual {:.3e}", coarse.max);
        let ratio = coarse.max / fine.max;
        assert!(ratio > 8.0, "ratio {ratio}");
    }

    #[test]
    fn completeness_holds_for_any_unit_direction() {
        let c = unit_speed(&["3*cos(t)", "3*sin(t)", "4*t"], (0.0, 2.0 * PI));
        let app = FrenetApparatus::compute(&c, 48).unwrap();
        let u = DVector::from_row_slice(&[0.0, 0.0, 1.0]);
        assert!(app.completeness_defect(&u).unwrap() < 1e-10);
        let v = DVector::from_row_slice(&[0.6, 0.0, 0.8]);
        assert!(app.completeness_defect(&v).unwrap() < 1e-10);
        let bad = DVector::from_row_slice(&[1.0, 1.0, 0.0]);
        assert!(matches!(
            app.completeness_defect(&bad),
            Err(HelixError::NotUnit { .. })
        ));
    }

    #[test]
    fn curvature_extraction_matches_frame_differencing() {
        let c = unit_speed(
            &["cos(t)", "sin(t)", "0.4*cos(3*t)", "0.4*sin(3*t)"],
            (0.0, PI),
        );
        let app = FrenetApparatus::compute(&c, 200).unwrap();
        // <V_1', V_2> by differencing should match kappa_1 up to stencil error
        let m = app.len();
        let mut worst: f64 = 0.0;
        let mut d_tangent = vec![DVector::zeros(4); m];
        for cnum in 0..4 {
            let col: Vec<f64> = app.frames().iter().map(|f| f[(0, cnum)]).collect();
            let d = grid::derivative(&col, app.step()).unwrap();
            for (j, dj) in d.into_iter().enumerate() {
                d_tangent[j][cnum] = dj;
            }
        }
        for j in 0..m {
            let v2 = app.frame_vector(j, 2);
            let diff = (d_tangent[j].dot(&v2) - app.curvature(1)[j]).abs();
            worst = worst.max(diff);
        }
        assert!(worst < 1e-5, "worst {worst:.3e}");
    }
}
