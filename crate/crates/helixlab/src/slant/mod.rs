//! Constant-angle (slant) detection: the coefficient test, the axis
//! machinery, the three-dimensional invariant, and the verification
//! identities, tied together by [`detect_slant_helix`].

pub mod axis;
pub mod gsequence;
pub mod sigma;
pub mod verify;

pub use axis::{oracle_axis_svd, recover_axis_from_g, AxisOracle};
pub use gsequence::{compute_g_basis, solve_integration_constant, GSequence};
pub use sigma::{check_sigma_equivalence, sigma_profile};
pub use verify::{
    differential_characterization_residual, integral_characterization,
    telescoping_identity_residual, IntegralCheck,
};

use nalgebra::DVector;

use crate::error::Result;
use crate::frenet::FrenetApparatus;
use crate::grid;
use crate::scalar::{real, Real};
use crate::tol;

/// Outcome of the constant-angle test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The second frame vector keeps a constant, non-right angle to a fixed
    /// direction.
    SlantHelix,
    /// A fixed direction exists but it is orthogonal to the second frame
    /// vector, where the coefficient construction does not apply.
    DegenerateOrthogonalAxis,
    /// No fixed direction at constant angle to the second frame vector.
    NotSlantHelix,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::SlantHelix => "slant_helix",
            Verdict::DegenerateOrthogonalAxis => "degenerate_orthogonal_axis",
            Verdict::NotSlantHelix => "not_slant_helix",
        }
    }
}

/// Residuals of the verification identities, evaluated on every detection.
#[derive(Debug, Clone, Copy)]
pub struct ResidualSummary<T> {
    pub differential: T,
    pub integral: T,
    pub telescoping: T,
}

/// What the independent nullspace oracle saw.
#[derive(Debug, Clone, Copy)]
pub struct OracleSummary<T> {
    pub found: bool,
    pub angle_min: Option<T>,
    pub angle_max: Option<T>,
}

/// Full outcome of [`detect_slant_helix`].
#[derive(Debug, Clone)]
pub struct DetectionReport<T> {
    pub verdict: Verdict,
    /// Mean of the sum of squares at the chosen integration constant. Under
    /// the slant verdict this is the squared secant of the angle; otherwise
    /// it is reported as a diagnostic.
    pub c: T,
    /// Angle to the axis, when one exists.
    pub theta: Option<T>,
    /// The fixed direction, when one exists (from the coefficient sequence
    /// under the slant verdict, from the oracle under the degenerate one).
    pub axis: Option<DVector<T>>,
    /// Constancy defect (std over mean) of the sum of squares.
    pub defect: T,
    /// Chosen integration constant.
    pub c0: T,
    pub residuals: ResidualSummary<T>,
    pub oracle: OracleSummary<T>,
}

/// Runs the constant-angle test on an apparatus.
///
/// The coefficient sequence is built from the curvatures, the integration
/// constant chosen to flatten the sum of squares, and the verdict follows
/// from the constancy defect against `threshold` (default
/// [`tol::DEFECT_THRESHOLD`]): a flat profile with mean above `1 +`
/// [`tol::C_MARGIN`] is a slant helix. When the coefficient test fails but
/// the independent nullspace oracle still finds a fixed direction orthogonal
/// to the second frame vector, the verdict is the degenerate orthogonal-axis
/// case that the coefficient construction cannot represent.
pub fn detect_slant_helix<T: Real>(
    app: &FrenetApparatus<T>,
    threshold: Option<T>,
) -> Result<DetectionReport<T>> {
    let threshold = threshold.unwrap_or_else(|| real::<T>(tol::DEFECT_THRESHOLD));
    let g = compute_g_basis(app)?;
    let c0 = solve_integration_constant(&g);
    let g = g.with_constant(c0);
    let (defect, c) = g.defect_and_mean()?;

    let oracle = match oracle_axis_svd(app) {
        Ok(o) => o,
        Err(crate::error::HelixError::AmbiguousNullspace { .. }) => AxisOracle {
            axis: None,
            angles: Vec::new(),
            sigma_min: T::zero(),
            sigma_max: T::zero(),
        },
        Err(e) => return Err(e),
    };
    let oracle_summary = OracleSummary {
        found: oracle.axis.is_some(),
        angle_min: oracle
            .angles
            .iter()
            .copied()
            .fold(None, |m: Option<T>, a| Some(m.map_or(a, |v| v.min(a)))),
        angle_max: oracle
            .angles
            .iter()
            .copied()
            .fold(None, |m: Option<T>, a| Some(m.map_or(a, |v| v.max(a)))),
    };

    let residuals = ResidualSummary {
        differential: differential_characterization_residual(&g, app)?,
        integral: integral_characterization(&g, app)?.residual,
        telescoping: telescoping_identity_residual(&g, app)?,
    };

    let slant = defect < threshold && c > T::one() + real::<T>(tol::C_MARGIN);
    let (verdict, theta, axis) = if slant {
        let theta = (T::one() / c.sqrt()).acos();
        let axis = recover_axis_from_g(&g, app, theta)?;
        (Verdict::SlantHelix, Some(theta), Some(axis))
    } else if let Some(u) = &oracle.axis {
        let mean_dot = {
            let mut acc = T::zero();
            for j in 0..app.len() {
                acc += app.frame_vector(j, 2).dot(u);
            }
            acc / real::<T>(app.len() as f64)
        };
        if mean_dot.abs() < real::<T>(tol::ORACLE_ORTHO_DOT) {
            let theta = grid::mean(&oracle.angles);
            (
                Verdict::DegenerateOrthogonalAxis,
                Some(theta),
                Some(u.clone()),
            )
        } else {
            (Verdict::NotSlantHelix, None, None)
        }
    } else {
        (Verdict::NotSlantHelix, None, None)
    };

    Ok(DetectionReport {
        verdict,
        c,
        theta,
        axis,
        defect,
        c0,
        residuals,
        oracle: oracle_summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::AnalyticCurve;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn apparatus(coords: &[&str], interval: (f64, f64)) -> FrenetApparatus<f64> {
        let c = AnalyticCurve::from_exprs(coords, interval)
            .unwrap()
            .arc_length_reparameterize(96)
            .unwrap();
        FrenetApparatus::compute(&c, 96).unwrap()
    }

    #[test]
    fn circular_helix_reports_the_degenerate_orthogonal_axis() {
        let app = apparatus(&["3*cos(t)", "3*sin(t)", "4*t"], (0.0, 2.0 * PI));
        let report = detect_slant_helix(&app, None).unwrap();
        assert_eq!(report.verdict, Verdict::DegenerateOrthogonalAxis);
        let axis = report.axis.expect("oracle axis");
        assert!((axis[2].abs() - 1.0).abs() < 1e-8);
        let theta = report.theta.expect("orthogonal angle");
        assert!((theta - FRAC_PI_2).abs() < 1e-6);
        assert!(report.oracle.found);
        // the coefficient test itself must have rejected
        assert!(report.defect > tol::DEFECT_THRESHOLD);
    }

    #[test]
    fn generic_curve_is_not_slant() {
        let app = apparatus(&["t", "t^2", "t^3"], (0.2, 1.2));
        let report = detect_slant_helix(&app, None).unwrap();
        assert_eq!(report.verdict, Verdict::NotSlantHelix);
        assert!(report.theta.is_none());
        assert!(report.axis.is_none());
        assert!(!report.oracle.found);
        assert!(report.residuals.telescoping < 1e-6);
    }
}
