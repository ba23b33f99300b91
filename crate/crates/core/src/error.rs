use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function}: argument out of domain ({detail})")]
    Domain { function: &'static str, detail: String },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("finite-difference step {step:e} too small at T = {at:e}")]
    StepUnderflow { step: f64, at: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("{what} did not converge after {terms} terms (tail bound {tail_bound:e})")]
    NotConverged {
        what: &'static str,
        terms: u64,
        tail_bound: f64,
    },
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }
}
