use thiserror::Error;

/// Everything that can go wrong inside gluekit.
#[derive(Debug, Error)]
pub enum GlueError {
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
    #[error("invalid argument: {0}")]
    InvalidArg(String),
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("missing parameter `{0}`")]
    MissingParam(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("canonicalization failed: {0}")]
    CanonicalizationFailed(String),
    #[error("tensor is not right-canonical (residual {residual:.3e})")]
    NotCanonical { residual: f64 },
    #[error("operator is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("no push-through solution (residual {residual:.3e})")]
    NoPush { residual: f64 },
    #[error("gcd(N={n}, eta={eta}) != 1")]
    NotCoprime { n: usize, eta: usize },
    #[error("error basis is not abelian")]
    NonAbelianBasis,
    #[error("conversion failed: {0}")]
    ConversionFailed(String),
    #[error("commutant is empty")]
    EmptyFamily,
    #[error("not every error is uniform: {0}")]
    NotUniform(String),
    #[error("push rule violated: {0}")]
    RuleViolation(String),
    #[error("degenerate measurement: {0}")]
    DegenerateMeasurement(String),
    #[error("correction failed: {0}")]
    CorrectionFailed(String),
    #[error("request too large: {requested} amplitudes exceeds limit {limit}")]
    TooLarge { requested: u128, limit: u128 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

impl GlueError {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        use GlueError::*;
        match self {
            InvalidTensor(_) | InvalidArg(_) | UnknownExample(_) | MissingParam(_)
            | DimensionMismatch { .. } | Io(_) | Parse(_) => 1,
            CorrectionFailed(_) | DegenerateMeasurement(_) => 3,
            TooLarge { .. } => 4,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for GlueError {
    fn from(e: serde_json::Error) -> Self {
        GlueError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GlueError>;
