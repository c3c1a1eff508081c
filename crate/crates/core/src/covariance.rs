//! Hermitian covariance matrices (statistical or sample).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Relative tolerance for accepting a matrix as positive semidefinite.
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    Statistical,
    Sample,
}

/// A `g x g` Hermitian positive semidefinite matrix.
///
/// Construction validates the Hermitian property and then copies the upper
/// triangle onto the lower one, so `entry(i, j) == entry(j, i).conj()` holds
/// bit-for-bit afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianCovariance {
    matrix: CMatrix,
    kind: CovarianceKind,
}

impl HermitianCovariance {
    pub fn new(matrix: CMatrix, kind: CovarianceKind) -> Result<Self> {
        let deviation = hermitian_deviation(&matrix)?;
        if deviation > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { deviation });
        }
        let cov = Self::from_hermitian_unchecked(symmetrize(matrix), kind);
        let eig = cov.eigenvalues_descending();
        if let (Some(&max), Some(&min)) = (eig.first(), eig.last()) {
            if min < -PSD_TOLERANCE * max.abs().max(1.0) {
                return Err(Error::NotPositiveSemidefinite {
                    min_eigenvalue: min,
                });
            }
        }
        Ok(cov)
    }

    /// Builds a covariance from a real symmetric matrix.
    pub fn from_real(matrix: &DMatrix<f64>, kind: CovarianceKind) -> Result<Self> {
        Self::new(matrix.map(|v| Complex64::new(v, 0.0)), kind)
    }

    /// Skips validation. Callers guarantee an exactly Hermitian PSD matrix.
    pub(crate) fn from_hermitian_unchecked(matrix: CMatrix, kind: CovarianceKind) -> Self {
        Self { matrix, kind }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// Multiplies every entry by a positive scalar.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(crate::error::invalid(
                "factor",
                "must be positive and finite",
            ));
        }
        Ok(Self::from_hermitian_unchecked(
            self.matrix.map(|v| v * factor),
            self.kind,
        ))
    }

    /// Frobenius norm of the matrix.
    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Eigenvalues sorted from largest to smallest.
    pub(crate) fn eigenvalues_descending(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        values.sort_by(|a, b| b.total_cmp(a));
        values
    }
}

/// Largest `|a_ij - conj(a_ji)|`, relative to `max(1, max |a_ij|)`.
pub(crate) fn hermitian_deviation(matrix: &CMatrix) -> Result<f64> {
    let (rows, cols) = matrix.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::Empty("matrix"));
    }
    let scale = matrix.iter().map(|v| v.norm()).fold(1.0_f64, f64::max);
    let mut worst = 0.0_f64;
    for i in 0..rows {
        for j in i..cols {
            let d = (matrix[(i, j)] - matrix[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    Ok(worst / scale)
}

fn symmetrize(mut matrix: CMatrix) -> CMatrix {
    let n = matrix.nrows();
    for i in 0..n {
        matrix[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            matrix[(j, i)] = matrix[(i, j)].conj();
        }
    }
    matrix
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symmetrizes_exactly() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.2, 0.1), c(0.2, -0.1 + 1e-15), c(1.0, 0.0)],
        );
        let cov = HermitianCovariance::new(m, CovarianceKind::Statistical).unwrap();
        assert_eq!(cov.entry(1, 0), cov.entry(0, 1).conj());
    }

    #[test]
    fn rejects_non_hermitian() {
        let m =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, 0.0), c(0.3, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            HermitianCovariance::new(m, CovarianceKind::Statistical),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            HermitianCovariance::from_real(&m, CovarianceKind::Statistical),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn rejects_non_square() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(
            HermitianCovariance::new(m, CovarianceKind::Sample),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }
}
