//! Default numerical thresholds, pinned in one place.
//!
//! | constant | guards |
//! |---|---|
//! | [`EPS_REGULARITY`] | minimum speed for a regular parameterization |
//! | [`EPS_UNIT_SPEED`] | allowed deviation of `\|alpha'(s)\|` from 1 |
//! | [`EPS_CURVATURE`] | pivot floor: curvature treated as vanished below it |
//! | [`EPS_FRAME_ORTHONORMAL`] | orthonormality defect allowed in a computed frame |
//! | [`QUAD_REL_TOL`] | quadrature refinement target |
//! | [`DEFECT_THRESHOLD`] | default constancy-defect cutoff of the detector |
//! | [`C_MARGIN`] | how far `C` must exceed 1 before the verdict \"slant\" |
//! | [`SVD_NULL_RATIO`] | singular-value ratio accepted as a nullspace |
//! | [`AXIS_SPREAD_TOL`] | pointwise axis scatter accepted by axis recovery |
//! | [`AXIS_NORM_TOL`] | allowed norm defect of the averaged axis before normalizing |
//! | [`ORACLE_ORTHO_DOT`] | mean angle cosine below which an oracle axis counts as orthogonal |
//! | [`C_ORTHO_CAP`] | largest squared-sum constant the coefficient search accepts as an angle |
//! | [`ROTATION_ORTHO_TOL`] | orthogonality defect allowed in rotation inputs |
//! | [`ODE_REL_TOL`], [`ODE_ABS_TOL`] | adaptive Runge-Kutta error control |
//! | [`MIN_STEP_FACTOR`] | step floor (times domain length) before failing |
//! | [`DOMAIN_MARGIN_FACTOR`] | default synthesis margin, times `C` |

pub const EPS_REGULARITY: f64 = 1e-8;
pub const EPS_UNIT_SPEED: f64 = 1e-8;
pub const EPS_CURVATURE: f64 = 1e-10;
pub const EPS_FRAME_ORTHONORMAL: f64 = 1e-8;
pub const QUAD_REL_TOL: f64 = 1e-10;
pub const DEFECT_THRESHOLD: f64 = 1e-3;
pub const C_MARGIN: f64 = 1e-3;
pub const SVD_NULL_RATIO: f64 = 1e-6;
pub const AXIS_SPREAD_TOL: f64 = 1e-2;
pub const AXIS_NORM_TOL: f64 = 1e-3;
pub const ORACLE_ORTHO_DOT: f64 = 1e-3;
/// `1 / ORACLE_ORTHO_DOT^2`: beyond this squared-sum constant the implied
/// axis cosine drops below the orthogonality resolution, so the candidate
/// belongs to the degenerate orthogonal branch, not the coefficient search.
pub const C_ORTHO_CAP: f64 = 1e6;
pub const ROTATION_ORTHO_TOL: f64 = 1e-10;
pub const ODE_REL_TOL: f64 = 1e-11;
pub const ODE_ABS_TOL: f64 = 1e-12;
pub const MIN_STEP_FACTOR: f64 = 1e-12;
pub const DOMAIN_MARGIN_FACTOR: f64 = 1e-3;

/// Arc-length tables refuse to go coarser than this many segments.
pub const MIN_RESOLUTION: usize = 64;
/// Frame grids refuse to go coarser than this many points.
pub const MIN_FRAME_GRID: usize = 32;

const _: () = {
    assert!(EPS_CURVATURE < EPS_REGULARITY);
    assert!(QUAD_REL_TOL < DEFECT_THRESHOLD);
    assert!(ODE_ABS_TOL <= ODE_REL_TOL);
    assert!(SVD_NULL_RATIO < DEFECT_THRESHOLD);
};
