use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter was outside its admissible range.
    #[error("parameter out of range: {0}")]
    Parameter(String),

    /// A mesh failed one of its structural invariants.
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// The conductivity is not uniformly positive.
    #[error("ellipticity violation: {0}")]
    Ellipticity(String),

    /// The iterative linear solver did not reach its tolerance.
    #[error("solver failed after {iterations} iterations, relative residual {residual:.3e}")]
    SolverDiverged { iterations: usize, residual: f64 },

    /// Power density data is not usable where positivity is required.
    #[error("degenerate power density data: {0}")]
    DegenerateData(String),

    /// The error metric is undefined (reference has zero norm).
    #[error("relative error undefined: reference field has zero L2 norm")]
    ZeroNormReference,

    /// The boundary-data curve has a vanishing tangent somewhere.
    #[error("boundary curve not regular: {0}")]
    Regularity(String),

    /// Too few samples to track the tangent argument reliably.
    #[error("undersampled tangent argument: {0}")]
    Undersampled(String),

    /// A boundary trace with too many wraps to unwrap sensibly.
    #[error("pathological boundary trace: {0}")]
    PathologicalTrace(String),

    /// Bad run configuration or malformed input file.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
