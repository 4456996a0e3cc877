use thiserror::Error;

/// Errors raised by the geometric operations of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("input contains non-finite entries")]
    NonFinite,

    #[error("matrix is rank deficient (relative smallest singular value {sigma_min:.3e})")]
    RankDeficient { sigma_min: f64 },

    #[error("frame is not orthonormal (residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },

    #[error("ambient dimension {n} must be at least twice the frame width {p}")]
    AmbientTooSmall { n: usize, p: usize },

    #[error("direction violates the tangent constraint (residual {residual:.3e})")]
    NotTangent { residual: f64 },

    #[error("tangent vectors are based at different points")]
    BaseMismatch,

    #[error("operator is not an isometry (residual {residual:.3e})")]
    NotIsometric { residual: f64 },

    #[error("degenerate plane (normalized area {area:.3e})")]
    DegeneratePlane { area: f64 },

    #[error(
        "shooting solver did not converge after {iterations} iterations \
         (residual {residual:.3e}, best length {best_length:.6})"
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best_length: f64,
    },

    #[error("singular value decomposition did not converge")]
    SvdNoConvergence,

    #[error("points are at the cut locus (largest principal angle {angle:.9})")]
    CutLocus { angle: f64 },

    #[error("point violates model constraint: {0}")]
    Constraint(String),

    #[error("lattice is ill-conditioned (Gram condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("group enumeration of order {order} exceeds the limit {limit}")]
    EnumerationOverflow { order: u128, limit: u128 },

    #[error("scalar set does not close under multiplication: {0}")]
    NonClosure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;

pub(crate) fn shape_mismatch(expected: (usize, usize), found: (usize, usize)) -> GeomError {
    GeomError::DimensionMismatch {
        expected: format!("{}x{}", expected.0, expected.1),
        found: format!("{}x{}", found.0, found.1),
    }
}
