use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("resolution {got} below the minimum of {min}")]
    ResolutionTooSmall { got: usize, min: usize },

    #[error("seed kernel spectrum dips to {spectral_min:e}; quadrature is misconfigured")]
    NegativeSpectrum { spectral_min: f64 },

    #[error("clipped spectral mass {clipped:e} exceeds budget {budget:e}")]
    ClipBudgetExceeded { clipped: f64, budget: f64 },

    #[error("{what} is {value} but must be a multiple of delta_u = {delta_u}")]
    BandMisaligned { what: &'static str, value: f64, delta_u: f64 },

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("need at least {min} replicas, got {got}")]
    TooFewReplicas { got: usize, min: usize },

    #[error("series did not converge within {cap} terms")]
    SeriesDiverged { cap: usize },

    #[error("{0}")]
    Unsupported(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
