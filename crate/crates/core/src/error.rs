use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} lies outside the primal domain: {detail}")]
    DomainViolation { what: String, detail: String },

    #[error("{what} lies outside the dual domain: {detail}")]
    DualDomainViolation { what: String, detail: String },

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameters: {0}")]
    InvalidSpec(String),

    #[error("matrix is not symmetric positive-definite: {0}")]
    NotSpd(String),

    #[error("matrix is singular or too ill-conditioned: {0}")]
    Singular(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("iterate left the domain at step {iteration}: {detail}")]
    DomainEscape { iteration: usize, detail: String },

    #[error("infinite divergence: second density vanishes at index {index} where the first has mass {mass}")]
    InfiniteDivergence { index: usize, mass: f64 },

    #[error("invalid density: {0}")]
    InvalidDensity(String),
}

impl Error {
    pub(crate) fn domain(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::DomainViolation {
            what: what.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn dual_domain(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::DualDomainViolation {
            what: what.into(),
            detail: detail.into(),
        }
    }

    /// True for failures of an iterative or numerical procedure (as opposed
    /// to malformed input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::DomainEscape { .. } | Error::InfiniteDivergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
