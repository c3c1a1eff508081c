//! Maximum-minimum eigenvalue (MME) detector.
//!
//! The test statistic is `lambda_max / lambda_min` of the sample covariance
//! of the stacked fusion vectors. H1 is declared when the statistic reaches
//! the threshold.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covariance::{
    hermitian_deviation, CMatrix, CovarianceKind, HermitianCovariance, HERMITIAN_TOLERANCE,
};
use crate::error::{invalid, Error, Result};
use crate::model::{SampleBlock, SmoothedVector};

/// Default eigenvalue floor relative to `lambda_max`.
pub const DEFAULT_LAMBDA_FLOOR: f64 = 1e-12;

/// Eigenvalues sorted from largest to smallest.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    values: Vec<f64>,
}

impl EigenSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::H0 => "H0",
            Self::H1 => "H1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub statistic: f64,
    pub threshold: f64,
    pub verdict: Hypothesis,
}

/// `(1 / K) sum x x^H` over the series.
pub fn sample_covariance(vectors: &[SmoothedVector]) -> Result<HermitianCovariance> {
    let first = vectors.first().ok_or(Error::Empty("vector series"))?;
    let g = first.dim();
    if let Some(v) = vectors.iter().find(|v| v.dim() != g) {
        return Err(invalid(
            "vectors",
            format!("mixed dimensions {g} and {}", v.dim()),
        ));
    }
    let mut acc = OuterProductAccumulator::new(g);
    for v in vectors {
        acc.add(v.entries());
    }
    Ok(acc.finish())
}

/// Sample covariance of the smoothed vectors of `block`, computed without
/// materializing them. Matches `sample_covariance(&build_smoothed_vectors(..))`.
pub fn block_sample_covariance(
    block: &SampleBlock,
    smoothing: usize,
) -> Result<HermitianCovariance> {
    let n = block.len();
    if n <= smoothing {
        return Err(Error::BlockTooShort {
            samples: n,
            smoothing,
        });
    }
    let g = block.num_receivers() * (smoothing + 1);
    let mut acc = OuterProductAccumulator::new(g);
    let mut x = vec![Complex64::new(0.0, 0.0); g];
    for t in smoothing..n {
        for (r, rx) in block.receivers().iter().enumerate() {
            for d in 0..=smoothing {
                x[r * (smoothing + 1) + d] = rx[t - d];
            }
        }
        acc.add(&x);
    }
    Ok(acc.finish())
}

/// Accumulates the upper triangle of `sum x x^H`.
struct OuterProductAccumulator {
    dim: usize,
    upper: Vec<Complex64>,
    count: usize,
}

impl OuterProductAccumulator {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            upper: vec![Complex64::new(0.0, 0.0); dim * (dim + 1) / 2],
            count: 0,
        }
    }

    fn add(&mut self, x: &[Complex64]) {
        let mut k = 0;
        for i in 0..self.dim {
            let xi = x[i];
            for xj in &x[i..] {
                self.upper[k] += xi * xj.conj();
                k += 1;
            }
        }
        self.count += 1;
    }

    fn finish(self) -> HermitianCovariance {
        let g = self.dim;
        let scale = 1.0 / self.count as f64;
        let mut m = CMatrix::zeros(g, g);
        let mut k = 0;
        for i in 0..g {
            for j in i..g {
                let v = self.upper[k] * scale;
                if i == j {
                    m[(i, i)] = Complex64::new(v.re, 0.0);
                } else {
                    m[(i, j)] = v;
                    m[(j, i)] = v.conj();
                }
                k += 1;
            }
        }
        HermitianCovariance::from_hermitian_unchecked(m, CovarianceKind::Sample)
    }
}

/// Eigenvalues of a Hermitian matrix, largest first.
pub fn hermitian_eigenvalues(matrix: &CMatrix) -> Result<EigenSpectrum> {
    let deviation = hermitian_deviation(matrix)?;
    if deviation > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { deviation });
    }
    let mut values: Vec<f64> = matrix
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(EigenSpectrum { values })
}

/// Eigenvalues of a covariance, largest first.
pub fn covariance_eigenvalues(cov: &HermitianCovariance) -> EigenSpectrum {
    EigenSpectrum {
        values: cov.eigenvalues_descending(),
    }
}

/// `lambda_max / lambda_min`, or `f64::INFINITY` when
/// `lambda_min <= floor * lambda_max`.
pub fn mme_statistic(cov: &HermitianCovariance, lambda_floor: f64) -> f64 {
    statistic_from_spectrum(&covariance_eigenvalues(cov), lambda_floor)
}

pub fn statistic_from_spectrum(spectrum: &EigenSpectrum, lambda_floor: f64) -> f64 {
    let (max, min) = (spectrum.max(), spectrum.min());
    if max <= 0.0 || min <= lambda_floor * max {
        f64::INFINITY
    } else {
        (max / min).max(1.0)
    }
}

/// `H1` iff `statistic >= threshold`.
pub fn decide(statistic: f64, threshold: f64) -> Result<Decision> {
    if !(threshold > 1.0) {
        return Err(invalid(
            "threshold",
            format!("gamma = {threshold} must exceed 1"),
        ));
    }
    if statistic.is_nan() {
        return Err(invalid("statistic", "is NaN"));
    }
    let verdict = if statistic >= threshold {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    };
    Ok(Decision {
        statistic,
        threshold,
        verdict,
    })
}
