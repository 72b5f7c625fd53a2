use thiserror::Error;

use crate::stein::Direction;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("support must contain at least two points, got [{lower}, {upper}]")]
    DegenerateSupport { lower: String, upper: String },

    #[error("truncation window cannot reach tail mass {tail_mass:e} (bound {achieved:e})")]
    TruncationUnreachable { tail_mass: f64, achieved: f64 },

    #[error("support violation: S_q = {q} is not contained in S_p = {p}")]
    SupportViolation { p: String, q: String },

    #[error("forward ratio of p vanishes at x = {x} while q(x + 1) > 0")]
    RatioDegenerate { x: i64 },

    #[error("Stein solution fails its own equation: residual {residual:e} > tolerance {tolerance:e}")]
    SolverResidual { residual: f64, tolerance: f64 },

    #[error("assumption A fails: the Stein solution is not in the {direction} test class of {side}")]
    AssumptionA { direction: Direction, side: &'static str },

    #[error("q puts no mass on the support of p")]
    DisjointSupport,

    #[error("mean of q is {mean}, expected {expected}")]
    MeanMismatch { mean: f64, expected: f64 },

    #[error("operator {operator} does not match a {family} density")]
    FamilyMismatch { operator: String, family: String },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("sample count must be positive")]
    EmptySample,

    #[error("empty parameter grid for suite {0}")]
    EmptyGrid(String),

    #[error("suite aborted at {params}: {source}")]
    SuiteAborted {
        params: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors that signal a violated support precondition rather than a
    /// malformed input.
    pub fn is_precondition(&self) -> bool {
        match self {
            Error::SupportViolation { .. }
            | Error::AssumptionA { .. }
            | Error::RatioDegenerate { .. }
            | Error::DisjointSupport
            | Error::MeanMismatch { .. } => true,
            Error::SuiteAborted { source, .. } => source.is_precondition(),
            _ => false,
        }
    }
}
