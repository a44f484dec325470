//! Error type shared by every module of the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, HelixError>;

/// Everything that can go wrong while building curves, frames, or reports.
#[derive(Debug, thiserror::Error)]
pub enum HelixError {
    /// Speed dropped below the regularity threshold somewhere on the interval.
    #[error("curve is not regular: |alpha'({t})| = {speed:.3e} below threshold {threshold:.3e}")]
    NonRegularCurve { t: f64, speed: f64, threshold: f64 },

    /// Too few sample points for the requested dimension.
    #[error("insufficient samples: got {got}, need at least {required} for dimension {dimension}")]
    InsufficientSamples {
        got: usize,
        required: usize,
        dimension: usize,
    },

    /// Derivative order beyond what the curve representation supports.
    #[error("derivative order {order} too high (maximum {max})")]
    OrderTooHigh { order: usize, max: usize },

    /// Arc-length parameter outside the open domain of the curve.
    #[error("parameter s = {s} outside the open domain (0, {length})")]
    OutOfDomain { s: f64, length: f64 },

    /// A matrix expected to be a rotation failed the orthogonality check.
    #[error("matrix is not a rotation: orthogonality defect {defect:.3e}, det = {det:.6}")]
    NotOrthogonal { defect: f64, det: f64 },

    /// Gram-Schmidt pivot collapsed: the derivative jet is linearly dependent.
    /// `vector_index` is the frame vector that could not be built, which means
    /// curvature kappa_{vector_index - 1} is (numerically) zero.
    #[error(
        "degenerate derivative jet{}: frame vector V_{vector_index} has pivot {pivot:.3e}, \
         so curvature kappa_{} vanishes",
        match s { Some(s) => format!(" at s = {s:.6}"), None => String::new() },
        vector_index - 1
    )]
    DegenerateJet {
        vector_index: usize,
        pivot: f64,
        s: Option<f64>,
    },

    /// A curvature required to be nonvanishing dropped below threshold.
    #[error("curvature kappa_{index} vanishes at s = {s:.6} (|kappa| = {value:.3e})")]
    CurvatureVanishes { index: usize, s: f64, value: f64 },

    /// Reparameterized curve's speed strays too far from 1.
    #[error("unit-speed defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    UnitSpeedDefect { defect: f64, tolerance: f64 },

    /// Per-point axis estimates disagree beyond tolerance.
    #[error("axis recovery unstable: pointwise spread {spread:.3e} exceeds {tolerance:.3e}")]
    AxisUnstable { spread: f64, tolerance: f64 },

    /// SVD nullspace is not one-dimensional: no unique candidate axis.
    #[error(
        "ambiguous nullspace: two smallest singular values {sigma_min:.3e} and {sigma_next:.3e} \
         are within a factor of 10"
    )]
    AmbiguousNullspace { sigma_min: f64, sigma_next: f64 },

    /// The constant C is in the excluded range C <= 1, where the planar-slope
    /// relation is undefined.
    #[error("constant C = {c:.6} excluded: the slope relation requires C > 1 + {margin:.1e}")]
    CExcluded { c: f64, margin: f64 },

    /// Synthesis target leaves the admissible domain.
    #[error("domain violation: {reason}")]
    DomainViolation { reason: String },

    /// Requested interval contains a zero of the prescribed curvature.
    #[error("interval contains a curvature zero near s = {s:.6} (margin {margin:.3e})")]
    IntervalContainsCurvatureZero { s: f64, margin: f64 },

    /// Adaptive integrator step size collapsed.
    #[error(
        "integration step failure at s = {s:.6}: step {step:.3e} below minimum {min_step:.3e}"
    )]
    StepFailure { s: f64, step: f64, min_step: f64 },

    /// A direction expected to be a unit vector is not.
    #[error("vector is not unit: |U| = {norm:.6e}")]
    NotUnit { norm: f64 },

    /// Malformed input data (file contents, expressions, configuration).
    #[error("parse error: {0}")]
    Parse(String),

    /// Structural misuse of an interface: bad dimension, empty grid, etc.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HelixError {
    /// Process exit code class used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        use HelixError::*;
        match self {
            Parse(_) | Io(_) | InvalidArgument(_) => 2,
            NonRegularCurve { .. }
            | InsufficientSamples { .. }
            | DegenerateJet { .. }
            | CurvatureVanishes { .. }
            | UnitSpeedDefect { .. }
            | NotUnit { .. }
            | NotOrthogonal { .. }
            | OrderTooHigh { .. }
            | OutOfDomain { .. } => 3,
            AxisUnstable { .. }
            | AmbiguousNullspace { .. }
            | CExcluded { .. }
            | StepFailure { .. } => 4,
            DomainViolation { .. } | IntervalContainsCurvatureZero { .. } => 5,
        }
    }
}
