//! Asymptotic bounds on the MME statistic and the resulting SNR-wall bound.
//!
//! Under H0 the statistic of the noise covariance is bounded below with two
//! Rayleigh-quotient probes aimed at the largest noise correlation. Under H1
//! it is bounded above with Gershgorin intervals. The SNR below which the H1
//! upper bound does not exceed the H0 lower bound is a lower bound on the
//! SNR wall.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::covariance::CMatrix;
use crate::error::{invalid, Error, Result};
use crate::model::{linear_to_db, Snr};
use crate::noise::{max_off_diagonal, CorrelationModel};

const PROBE_NORM_TOLERANCE: f64 = 1e-9;
const DIAGONAL_TOLERANCE: f64 = 1e-12;

/// `(1 + rho) / (1 - rho)` for the largest H0 noise correlation modulus.
pub fn h0_statistic_lower_bound(rho_max: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho_max) {
        return Err(Error::CorrelationOutOfRange { rho: rho_max });
    }
    Ok((1.0 + rho_max) / (1.0 - rho_max))
}

/// Rayleigh quotients `(z1^H R z1, z2^H R z2)`.
///
/// For any unit probes the first value is a lower bound on `lambda_max` and
/// the second an upper bound on `lambda_min`.
pub fn rayleigh_eigen_bounds(
    matrix: &CMatrix,
    z1: &DVector<Complex64>,
    z2: &DVector<Complex64>,
) -> Result<(f64, f64)> {
    Ok((quadratic_form(matrix, z1)?, quadratic_form(matrix, z2)?))
}

fn quadratic_form(matrix: &CMatrix, z: &DVector<Complex64>) -> Result<f64> {
    if z.len() != matrix.nrows() || !matrix.is_square() {
        return Err(invalid(
            "probe",
            format!(
                "length {} does not match a {:?} matrix",
                z.len(),
                matrix.shape()
            ),
        ));
    }
    let norm = z.norm();
    if (norm - 1.0).abs() > PROBE_NORM_TOLERANCE {
        return Err(Error::NonUnitProbe { norm });
    }
    Ok(z.dotc(&(matrix * z)).re)
}

/// Probe pair aimed at the largest off-diagonal entry `|rho| e^{j phi}` at
/// `(i, k)`: `z = (e_i +- e^{-j phi} e_k) / sqrt(2)`.
///
/// Ties go to the first entry in a row-major scan. Returns `None` for `1 x 1`
/// matrices.
pub fn extremal_probes(matrix: &CMatrix) -> Option<(DVector<Complex64>, DVector<Complex64>)> {
    let (i, k, entry) = max_off_diagonal(matrix)?;
    let g = matrix.nrows();
    let phase = if entry.norm() > 0.0 {
        (entry / entry.norm()).conj()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut z1 = DVector::zeros(g);
    let mut z2 = DVector::zeros(g);
    z1[i] = Complex64::new(s, 0.0);
    z2[i] = Complex64::new(s, 0.0);
    z1[k] = phase * s;
    z2[k] = -phase * s;
    Some((z1, z2))
}

/// Gershgorin interval `(upper bound on lambda_max, lower bound on lambda_min)`
/// for a Hermitian matrix with constant diagonal.
pub fn gershgorin_bounds(matrix: &CMatrix) -> Result<(f64, f64)> {
    let (rows, cols) = matrix.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::Empty("matrix"));
    }
    let center = matrix[(0, 0)].re;
    for i in 1..rows {
        let d = matrix[(i, i)].re;
        if (d - center).abs() > DIAGONAL_TOLERANCE * center.abs().max(1.0) {
            return Err(Error::UnequalDiagonal {
                first: center,
                other: d,
                index: i,
            });
        }
    }
    let radius = (0..rows)
        .map(|i| {
            (0..cols)
                .filter(|&j| j != i)
                .map(|j| matrix[(i, j)].norm())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    Ok((center + radius, center - radius))
}

/// `max_i sum_{j != i} |rho^eta_ij + SNR rho^s_ij|`.
fn h1_row_sum(corr: &CorrelationModel, snr: Snr) -> f64 {
    let s = snr.linear();
    let g = corr.dim();
    (0..g)
        .map(|i| {
            (0..g)
                .filter(|&j| j != i)
                .map(|j| (corr.noise_h1()[(i, j)] + s * corr.signal()[(i, j)]).norm())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Whether `1 + SNR > max_i sum_{j != i} |rho^eta_ij + SNR rho^s_ij|`.
pub fn validity_condition(corr: &CorrelationModel, snr: Snr) -> bool {
    1.0 + snr.linear() > h1_row_sum(corr, snr)
}

/// Gershgorin upper bound on the asymptotic H1 statistic, `None` when the
/// validity condition fails.
pub fn h1_statistic_upper_bound(corr: &CorrelationModel, snr: Snr) -> Option<f64> {
    let radius = h1_row_sum(corr, snr);
    let center = 1.0 + snr.linear();
    (center > radius).then(|| (center + radius) / (center - radius))
}

/// Whether the H1 upper bound does not exceed the H0 lower bound at `snr`.
pub fn nonrobustness_inequality(corr: &CorrelationModel, snr: Snr, rho_max: f64) -> Result<bool> {
    if !(rho_max > 0.0 && rho_max < 1.0) {
        return Err(Error::CorrelationOutOfRange { rho: rho_max });
    }
    let upper =
        h1_statistic_upper_bound(corr, snr).ok_or(Error::ValidityViolated { snr: snr.linear() })?;
    Ok(upper <= h0_statistic_lower_bound(rho_max)?)
}

/// `p - 1` for perfectly correlated receivers.
pub fn kappa_max_receiver(receivers: usize) -> f64 {
    receivers.saturating_sub(1) as f64
}

/// Largest off-diagonal row sum of the single-receiver signal correlation
/// for smoothing `Q` and oversampling `M`.
pub fn kappa_max_time(smoothing: usize, oversampling: usize) -> f64 {
    let q = smoothing as f64;
    let m = oversampling as f64;
    if smoothing.div_ceil(2) >= oversampling {
        m - 1.0
    } else if smoothing.is_multiple_of(2) {
        q - (q * q + 2.0 * q) / (4.0 * m)
    } else {
        q - (q + 1.0) * (q + 1.0) / (4.0 * m)
    }
}

/// `p - 1 + p kappa_time`.
pub fn kappa_max_combined(receivers: usize, kappa_time: f64) -> f64 {
    let p = receivers as f64;
    p - 1.0 + p * kappa_time
}

/// Closed-form SNR-wall lower bound for white H1 noise.
///
/// `validity_snr_cap` is `f64::INFINITY` when unbounded; `wall_db` is
/// `-inf` when the bound is undefined. Non-finite values serialize as JSON
/// `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub kappa_max: f64,
    pub alpha_max: f64,
    pub validity_snr_cap: f64,
    pub wall_linear: f64,
    pub wall_db: f64,
    pub defined: bool,
}

impl BoundReport {
    pub fn undefined_reason(&self) -> Option<String> {
        if self.defined {
            None
        } else if self.kappa_max < 1.0 {
            Some(format!("kappa_max = {} < 1", self.kappa_max))
        } else {
            Some(format!(
                "wall {} is not below the validity cap {}",
                self.wall_linear, self.validity_snr_cap
            ))
        }
    }
}

pub fn snr_wall_lower_bound(alpha_max: f64, kappa_max: f64) -> Result<BoundReport> {
    if !(alpha_max > 1.0) || alpha_max.is_infinite() {
        return Err(invalid(
            "alpha_max",
            format!("{alpha_max} must be finite and > 1 (no noise-coloring uncertainty otherwise)"),
        ));
    }
    if !(kappa_max >= 0.0) || kappa_max.is_infinite() {
        return Err(invalid(
            "kappa_max",
            format!("{kappa_max} must be finite and >= 0"),
        ));
    }
    if kappa_max < 1.0 {
        return Ok(BoundReport {
            kappa_max,
            alpha_max,
            validity_snr_cap: f64::INFINITY,
            wall_linear: 0.0,
            wall_db: f64::NEG_INFINITY,
            defined: false,
        });
    }
    let validity_snr_cap = if kappa_max == 1.0 {
        f64::INFINITY
    } else {
        1.0 / (kappa_max - 1.0)
    };
    let wall_linear = (alpha_max - 1.0) / (1.0 + kappa_max + alpha_max * (kappa_max - 1.0));
    Ok(BoundReport {
        kappa_max,
        alpha_max,
        validity_snr_cap,
        wall_linear,
        wall_db: linear_to_db(wall_linear),
        defined: wall_linear < validity_snr_cap && wall_linear > 0.0,
    })
}

/// Which correlation domain the closed-form `kappa_max` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaCase {
    None,
    Receiver,
    Time,
    Combined,
}

impl KappaCase {
    pub fn of(receivers: usize, smoothing: usize) -> Self {
        match (receivers > 1, smoothing > 0) {
            (false, false) => Self::None,
            (true, false) => Self::Receiver,
            (false, true) => Self::Time,
            (true, true) => Self::Combined,
        }
    }
}

/// `kappa_max` for synchronized receivers with a rectangular-pulse signal.
pub fn kappa_max_for(receivers: usize, smoothing: usize, oversampling: usize) -> Result<f64> {
    if receivers == 0 || oversampling == 0 {
        return Err(invalid("receivers/oversampling", "must be at least 1"));
    }
    Ok(match KappaCase::of(receivers, smoothing) {
        KappaCase::None => 0.0,
        KappaCase::Receiver => kappa_max_receiver(receivers),
        KappaCase::Time => kappa_max_time(smoothing, oversampling),
        KappaCase::Combined => {
            kappa_max_combined(receivers, kappa_max_time(smoothing, oversampling))
        }
    })
}
