//! Signal model: sample blocks, smoothed fusion vectors and the oversampled
//! BPSK primary-user signal.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::covariance::{CovarianceKind, HermitianCovariance};
use crate::error::{invalid, Error, Result};
use crate::rng::rng_from_seed;

/// Complex baseband samples from `p` receivers, each of length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBlock {
    receivers: Vec<Vec<Complex64>>,
}

impl SampleBlock {
    pub fn new(receivers: Vec<Vec<Complex64>>) -> Result<Self> {
        let first = receivers
            .first()
            .ok_or(Error::Empty("sample block needs at least one receiver"))?;
        let len = first.len();
        if len == 0 {
            return Err(Error::Empty("receiver sequence"));
        }
        if let Some(bad) = receivers.iter().find(|r| r.len() != len) {
            return Err(Error::RaggedBlock {
                expected: len,
                found: bad.len(),
            });
        }
        Ok(Self { receivers })
    }

    pub fn single(samples: Vec<Complex64>) -> Result<Self> {
        Self::new(vec![samples])
    }

    pub fn num_receivers(&self) -> usize {
        self.receivers.len()
    }

    pub fn len(&self) -> usize {
        self.receivers[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn receiver(&self, index: usize) -> &[Complex64] {
        &self.receivers[index]
    }

    pub fn receivers(&self) -> &[Vec<Complex64>] {
        &self.receivers
    }

    /// Adds the same sequence to every receiver (synchronized reception).
    pub fn add_common(&mut self, signal: &[Complex64]) -> Result<()> {
        if signal.len() < self.len() {
            return Err(invalid("signal", "shorter than the sample block"));
        }
        for rx in &mut self.receivers {
            for (x, s) in rx.iter_mut().zip(signal) {
                *x += *s;
            }
        }
        Ok(())
    }
}

/// Stacked fusion-center vector of dimension `p (Q + 1)`.
///
/// Layout is receiver-major with the newest sample first:
/// `[x_1(n), x_1(n-1), .., x_1(n-Q), x_2(n), .., x_p(n-Q)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedVector {
    entries: Vec<Complex64>,
    smoothing: usize,
}

impl SmoothedVector {
    pub fn new(entries: Vec<Complex64>, smoothing: usize) -> Result<Self> {
        if entries.is_empty() || !entries.len().is_multiple_of(smoothing + 1) {
            return Err(invalid(
                "entries",
                format!(
                    "length {} is not a multiple of Q + 1 = {}",
                    entries.len(),
                    smoothing + 1
                ),
            ));
        }
        Ok(Self { entries, smoothing })
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn smoothing(&self) -> usize {
        self.smoothing
    }
}

/// Parameters of the primary-user signal and the fusion vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalModelParams {
    /// Samples per symbol `M`.
    pub oversampling: usize,
    /// Symbol power `sigma_s^2`.
    pub symbol_variance: f64,
    pub receivers: usize,
    /// Smoothing `Q`; each receiver contributes `Q + 1` samples.
    pub smoothing: usize,
}

impl SignalModelParams {
    pub fn new(
        oversampling: usize,
        symbol_variance: f64,
        receivers: usize,
        smoothing: usize,
    ) -> Result<Self> {
        let params = Self {
            oversampling,
            symbol_variance,
            receivers,
            smoothing,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.oversampling == 0 {
            return Err(invalid("oversampling", "M must be at least 1"));
        }
        if !(self.symbol_variance >= 0.0 && self.symbol_variance.is_finite()) {
            return Err(invalid("symbol_variance", "must be finite and nonnegative"));
        }
        if self.receivers == 0 {
            return Err(invalid("receivers", "p must be at least 1"));
        }
        Ok(())
    }

    /// Fusion vector dimension `g = p (Q + 1)`.
    pub fn dim(&self) -> usize {
        self.receivers * (self.smoothing + 1)
    }
}

/// Signal-to-noise power ratio.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Snr(f64);

impl Snr {
    pub fn from_linear(linear: f64) -> Result<Self> {
        if !(linear >= 0.0) || linear.is_infinite() {
            return Err(invalid(
                "snr",
                format!("linear SNR {linear} must be finite and >= 0"),
            ));
        }
        Ok(Self(linear))
    }

    pub fn from_db(db: f64) -> Result<Self> {
        if db.is_nan() || db == f64::INFINITY {
            return Err(invalid("snr", format!("{db} dB")));
        }
        Ok(Self(db_to_linear(db)))
    }

    pub fn linear(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        linear_to_db(self.0)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Oversampled BPSK with a rectangular pulse.
///
/// Each symbol is `+-sqrt(sigma_s^2)` on the real axis and is held for `M`
/// consecutive samples starting at sample 0.
pub fn generate_bpsk_signal(
    num_symbols: usize,
    params: &SignalModelParams,
    seed: u64,
) -> Result<Vec<Complex64>> {
    if num_symbols == 0 {
        return Err(invalid("num_symbols", "must be at least 1"));
    }
    params.validate()?;
    let amplitude = params.symbol_variance.sqrt();
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(num_symbols * params.oversampling);
    for _ in 0..num_symbols {
        let symbol = if rng.random::<bool>() {
            amplitude
        } else {
            -amplitude
        };
        out.extend(std::iter::repeat_n(
            Complex64::new(symbol, 0.0),
            params.oversampling,
        ));
    }
    Ok(out)
}

/// `E[s*(n) s(n+k)] = sigma_s^2 (1 - |k|/M)` for `|k| < M`, zero otherwise.
pub fn signal_autocorrelation(lag: i64, params: &SignalModelParams) -> f64 {
    let m = params.oversampling as u64;
    let k = lag.unsigned_abs();
    if k >= m {
        0.0
    } else {
        params.symbol_variance * (1.0 - k as f64 / m as f64)
    }
}

/// Frames a block into the `N - Q` vectors `x(Q), .., x(N-1)`.
pub fn build_smoothed_vectors(
    block: &SampleBlock,
    smoothing: usize,
) -> Result<Vec<SmoothedVector>> {
    let n = block.len();
    if n <= smoothing {
        return Err(Error::BlockTooShort {
            samples: n,
            smoothing,
        });
    }
    let g = block.num_receivers() * (smoothing + 1);
    let vectors = (smoothing..n)
        .map(|t| {
            let mut entries = Vec::with_capacity(g);
            for rx in block.receivers() {
                entries.extend((0..=smoothing).map(|d| rx[t - d]));
            }
            SmoothedVector { entries, smoothing }
        })
        .collect();
    Ok(vectors)
}

/// Statistical signal covariance `R_s` for synchronized receivers.
///
/// Entry for positions `(r1, d1)` and `(r2, d2)` is the signal
/// autocorrelation at lag `d1 - d2`, independent of the receiver pair.
pub fn statistical_signal_covariance(params: &SignalModelParams) -> Result<HermitianCovariance> {
    params.validate()?;
    let q1 = params.smoothing + 1;
    let g = params.dim();
    let m = DMatrix::from_fn(g, g, |i, j| {
        let lag = (i % q1) as i64 - (j % q1) as i64;
        Complex64::new(signal_autocorrelation(lag, params), 0.0)
    });
    Ok(HermitianCovariance::from_hermitian_unchecked(
        m,
        CovarianceKind::Statistical,
    ))
}
