use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("argument {value} outside the domain of {what} (requires > {bound})")]
    OutsideDomain { what: String, value: f64, bound: f64 },

    /// A theorem's hypothesis or an a-priori constant could not be certified.
    #[error("certificate fails: {0}")]
    CertificateFails(String),

    /// A supremum over an unbounded set is infinite.
    #[error("supremum is unbounded: {0}")]
    Unbounded(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("profile has no zero before s = {s_max:e}")]
    NoZero { s_max: f64 },

    #[error("step size underflow at s = {s:e}")]
    StepUnderflow { s: f64 },

    #[error("target radius {target} not attainable; shooting radii seen in [{lo}, {hi}]")]
    NotAttainable { target: f64, lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures that mean "the hypothesis does not hold" rather than
    /// "the caller passed garbage" or "the numerics broke".
    pub fn is_certificate_failure(&self) -> bool {
        matches!(self, Error::CertificateFails(_) | Error::Unbounded(_))
    }
}
