use thiserror::Error;

/// Errors raised by the sensing, noise and bound routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("receiver sequences have unequal lengths ({expected} vs {found})")]
    RaggedBlock { expected: usize, found: usize },

    #[error("block of {samples} samples is too short for smoothing Q = {smoothing}")]
    BlockTooShort { samples: usize, smoothing: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("Cholesky factorization failed: target covariance is not positive definite")]
    NotPositiveDefinite,

    #[error("diagonal entries differ (r_00 = {first}, r_{index}{index} = {other})")]
    UnequalDiagonal {
        first: f64,
        other: f64,
        index: usize,
    },

    #[error("target spectrum has a negative entry {value:e} at bin {bin}")]
    NegativeSpectrum { bin: usize, value: f64 },

    #[error("probe vector is not unit norm (norm {norm})")]
    NonUnitProbe { norm: f64 },

    #[error("H1 validity condition 1 + SNR > max row sum fails at SNR = {snr}")]
    ValidityViolated { snr: f64 },

    #[error("largest H0 noise correlation {rho} outside (0, 1)")]
    CorrelationOutOfRange { rho: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{context}: {source}")]
    Scenario {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
