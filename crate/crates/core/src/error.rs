use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("degenerate simplex {index}: signed volume {volume:e} below tolerance")]
    DegenerateSimplex { index: usize, volume: f64 },
    #[error("non-manifold facet shared by {count} simplices")]
    NonManifold { count: usize },
    #[error("mesh is disconnected ({components} adjacency components)")]
    Disconnected { components: usize },
    #[error("vertex index {index} out of range (mesh has {len} vertices)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("mesh has no simplices")]
    EmptyMesh,
    #[error("dimension {0} unsupported (only 2 and 3)")]
    BadDimension(usize),
    #[error("inner covering level {level} is empty (offset {offset:e} too large)")]
    EmptyLevel { level: usize, offset: f64 },

    #[error("query value lies on the image of the boundary (distance {dist:e} <= {tol:e})")]
    OnImageBoundary { dist: f64, tol: f64 },
    #[error("query value is not a regular value: {reason}")]
    NotRegularValue { reason: String },
    #[error("winding/solid-angle sum {sum} has rounding residual {residual} >= 0.25")]
    NumericallyAmbiguous { sum: f64, residual: f64 },
    #[error("degree representatives disagree within a region: {details}")]
    InconsistentRegion { details: String },
    #[error("mollifier support crosses the image boundary")]
    SupportCrossesImageBoundary,

    #[error("no simplex within proximity {eta:e} of the query value")]
    EmptyPreimage { eta: f64 },
    #[error("cannot separate preimage piece: {0}")]
    CannotSeparate(String),

    #[error("ball of radius {radius:e} contains no full simplex")]
    BallTooSmall { radius: f64 },
    #[error("sigma check skipped: complement of the boundary has {count} components, not 2")]
    HypothesisViolated { count: usize },

    #[error("simplex {index} has non-positive determinant {det:e}")]
    NonpositiveDeterminant { index: usize, det: f64 },
    #[error("initial map infeasible: {0}")]
    InfeasibleInitial(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
