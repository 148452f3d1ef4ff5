use thiserror::Error;

use crate::model::CorrelationStructure;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rho = {rho} lies outside the admissible interval ({lo}, {hi}) of {structure}")]
    InadmissibleRho {
        structure: CorrelationStructure,
        rho: f64,
        lo: f64,
        hi: f64,
    },

    #[error("rho = {rho} sits on the boundary of the admissible interval of {structure}: degenerate covariance")]
    DegenerateCovariance { structure: CorrelationStructure, rho: f64 },

    #[error("{structure} carries no correlation; rho must be 0, got {rho}")]
    UnusedRho { structure: CorrelationStructure, rho: f64 },

    #[error("sigma must be finite and strictly positive, got {0}")]
    InvalidSigma(f64),

    #[error("non-finite value supplied for {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("macro-variable index {index} out of range for {structure} (has {dim})")]
    IndexOutOfRange {
        structure: CorrelationStructure,
        index: usize,
        dim: usize,
    },

    #[error("isserlis oracle supports degree <= {max_degree} and at most {max_vars} variables")]
    OracleLimit { max_degree: u32, max_vars: usize },

    #[error("{0} requires both mu and sigma as macro-variables")]
    NotTwoDimensional(CorrelationStructure),

    #[error("{0} has a single macro-variable; use the monovariate routines")]
    NotMonovariate(CorrelationStructure),

    #[error("metric is not invertible (determinant {0})")]
    SingularMetric(f64),

    #[error("degenerate 2-plane: Gram determinant {0}")]
    DegenerateBasis(f64),

    #[error("geodesic reached the manifold boundary at tau = {tau} (sigma = {sigma})")]
    ManifoldBoundary { tau: f64, sigma: f64 },

    #[error("invalid geodesic constants: {0}")]
    InvalidConstants(&'static str),

    #[error("invalid integration setup: {0}")]
    InvalidIntegration(&'static str),

    #[error("plateau test failed: relative variation {variation:e} exceeds {tolerance:e}")]
    PlateauFailure { variation: f64, tolerance: f64 },

    #[error("argument out of range: {0}")]
    OutOfRange(&'static str),
}
