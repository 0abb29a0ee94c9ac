use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric (entry ({row}, {col}) differs)")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    #[error("Rayleigh quotient denominator is numerically zero ({0:e})")]
    DenominatorNearZero(f64),

    #[error("leading generalized eigenvalue is not separated (gap {0:e})")]
    DegenerateGap(f64),

    #[error("generator output norm {norm:e} is below the normalization floor")]
    DegenerateOutput { norm: f64 },

    #[error("every projection restart hit a degenerate generator output")]
    AllRestartsDegenerate,

    #[error("vector is orthogonal to the subspace; projection undefined")]
    DegenerateProjection,

    #[error("zero vector cannot be projected")]
    ZeroVector,

    #[error("denominator u'Bu = {value:e} is not positive at iteration {iteration}")]
    DenominatorNonPositive { iteration: usize, value: f64 },

    #[error("rho = {value:e} is not positive at iteration {iteration}")]
    NonPositiveRho { iteration: usize, value: f64 },

    #[error("all {0} restarts failed")]
    AllRunsFailed(usize),

    #[error("within-class scatter is singular")]
    SingularWithinScatter,

    #[error("need at least two classes with two samples each")]
    DegenerateClasses,

    #[error("covariance block {0} is singular")]
    SingularBlock(&'static str),

    #[error("instance carries no ground truth")]
    TruthMissing,

    #[error("rho = {rho} outside (lambda_2, lambda_1] = ({lambda2}, {lambda1}]")]
    RhoOutOfRange { rho: f64, lambda1: f64, lambda2: f64 },

    #[error("alignment with v* is not positive ({0})")]
    NonPositiveAlignment(f64),

    #[error("log-log fit is degenerate: {0}")]
    DegenerateFit(&'static str),

    #[error("unknown activation `{0}`")]
    UnknownActivation(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
