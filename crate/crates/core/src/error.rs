use thiserror::Error;

/// Errors raised by the solver, its building blocks and the benchmark harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DfolsError {
    #[error("degenerate interpolation set")]
    DegenerateSet,

    #[error("infeasible initial geometry: {0}")]
    InfeasibleInitialGeometry(String),

    #[error("duplicate interpolation point")]
    DuplicatePoint,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("variable scaling requires finite bounds on every variable")]
    InfiniteBounds,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("residual evaluation failed: {0}")]
    EvaluationFailed(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("degenerate problem: {0}")]
    DegenerateProblem(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for DfolsError {
    fn from(err: std::io::Error) -> Self {
        DfolsError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DfolsError>;
