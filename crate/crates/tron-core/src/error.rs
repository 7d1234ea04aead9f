use thiserror::Error;

/// Errors surfaced by the training and estimation routines.
///
/// Hypothesis failures carry the name of the violated condition and a numeric
/// margin so callers (and the CLI) can report exactly which assumption broke.
#[derive(Debug, Error)]
pub enum TronError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("hypothesis violated: {name} (margin {margin:e})")]
    HypothesisViolated { name: String, margin: f64 },

    #[error("invalid parameter {name}: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("input radius exceeds 1: sample {index} has norm {norm}")]
    RadiusViolation { index: usize, norm: f64 },

    #[error("already converged: target {target:e} >= initial squared error {initial:e}")]
    AlreadyConverged { target: f64, initial: f64 },

    #[error("target below noise floor: eps^2*delta = {target:e} <= floor {floor:e}")]
    TargetBelowFloor { target: f64, floor: f64 },

    #[error(
        "perturbation bound exceeded: |xi| = {xi:e} > theta* = {theta_star:e} \
         (support radius assumption broken)"
    )]
    PerturbationBoundExceeded { xi: f64, theta_star: f64 },

    #[error("rank-deficient after {attempts} sampling attempts (sigma_min = {sigma_min:e})")]
    RankDeficient { attempts: usize, sigma_min: f64 },

    #[error("dataset inputs are not symmetric under negation (sample {index})")]
    AsymmetricDataset { index: usize },

    #[error("consistency failure: lambda_min(A_bar Sigma M^T) = {lambda_min:e} <= 0")]
    InconsistentPair { lambda_min: f64 },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, TronError>;

impl TronError {
    /// Shorthand for a named hypothesis failure with its numeric margin
    /// (negative margin = amount by which the condition failed).
    pub fn hypothesis(name: impl Into<String>, margin: f64) -> Self {
        TronError::HypothesisViolated {
            name: name.into(),
            margin,
        }
    }
}
