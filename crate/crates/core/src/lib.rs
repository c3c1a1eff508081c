//! Eigenvalue-based spectrum sensing under noise-coloring uncertainty.
//!
//! * [`model`]: fusion-vector framing and the oversampled BPSK primary signal.
//! * [`noise`]: white, AR(1), Cholesky-colored and PSD-shaped Gaussian noise.
//! * [`detector`]: sample covariance, Hermitian eigenvalues and the MME
//!   statistic.
//! * [`bounds`]: asymptotic statistic bounds and the SNR-wall lower bound.
//! * [`montecarlo`]: seeded experiments, histograms and empirical wall search.

pub mod bounds;
pub mod covariance;
pub mod detector;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod noise;
pub mod rng;

pub use covariance::{CMatrix, CovarianceKind, HermitianCovariance};
pub use error::{Error, Result};
pub use num_complex::Complex64;
