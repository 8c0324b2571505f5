use thiserror::Error;

use crate::formula::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid formula: {0}")]
    InvalidFormula(String),

    #[error("input has {got} bits but the formula reads variables up to x{expected}")]
    InputLength { expected: usize, got: usize },

    #[error("invalid input bit string: {0}")]
    InvalidBits(String),

    #[error("beta must lie in (0, 1/2], got {0}")]
    InvalidBeta(f64),

    #[error("fan-in bound must be at least 2, got {0}")]
    InvalidFanIn(usize),

    #[error("rebalancing parameter k must be at least 2, got {0}")]
    InvalidK(usize),

    #[error("requested size {requested} exceeds the limit {limit}")]
    TooLarge { requested: usize, limit: usize },

    #[error("matrix has {vertices} vertices, above the dense threshold {threshold}")]
    OverDenseThreshold { vertices: usize, threshold: usize },

    #[error("matrix has no nonzero entries")]
    ZeroMatrix,

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("principal eigenvector entry at vertex {vertex} is not positive ({value:e})")]
    NonPositiveEigenvector { vertex: usize, value: f64 },

    #[error("norm bound {bound} is below the spectral radius {radius}")]
    NormBoundTooSmall { bound: f64, radius: f64 },

    #[error("counter size must be even and at least 2, got {0}")]
    InvalidCounter(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation requires phi(x) = {required}, but the formula evaluates to {actual}")]
    WrongEvaluation { required: bool, actual: bool },

    #[error("energy {energy} is outside the admissible range (0, {limit}]")]
    EnergyOutOfRange { energy: f64, limit: f64 },

    #[error("vector violates the local eigen-equation at vertex {vertex} (residual {residual:e})")]
    NotLocalEigenvector { vertex: usize, residual: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
