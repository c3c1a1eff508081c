//! White and colored Gaussian noise synthesis.
//!
//! Three colored-noise procedures are provided:
//!
//! * [`ar1_noise`]: time-domain AR(1) recursion started from the stationary
//!   distribution.
//! * [`cholesky_colored_noise`]: receiver-domain coloring. Each time instant
//!   draws a white `p`-vector and multiplies it by the Cholesky factor of the
//!   target covariance. Samples stay independent over time.
//! * [`psd_shaped_noise`]: time-domain coloring for long blocks. A white
//!   frequency-domain basis is multiplied by the square root of the target
//!   power spectrum, transformed with the inverse DFT and normalized to the
//!   requested power.

use std::f64::consts::PI;
use std::io::{self, Write};

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::covariance::{CMatrix, CovarianceKind, HermitianCovariance};
use crate::error::{invalid, Error, Result};
use crate::model::SampleBlock;
use crate::rng::{complex_gaussian, derive_seed, rng_from_seed};

/// Relative tolerance for negative entries of a target spectrum.
pub const SPECTRUM_TOLERANCE: f64 = 1e-9;

const UNIT_DIAGONAL_TOLERANCE: f64 = 1e-12;

/// How an AR(1) process is synthesized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ar1Synthesis {
    /// Direct recursion `eta(n) = a eta(n-1) + eps(n)`.
    Recursive,
    /// Inverse-DFT shaping of a white spectrum.
    #[default]
    Spectral,
}

/// Receiver noise model.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    White {
        variance: f64,
    },
    Ar1 {
        coefficient: f64,
        variance: f64,
        synthesis: Ar1Synthesis,
    },
    /// Spatially colored, temporally white noise with the given `p x p`
    /// covariance. The diagonal must be constant (the noise power).
    ReceiverCorrelated {
        target: HermitianCovariance,
    },
}

impl NoiseModel {
    pub fn white(variance: f64) -> Result<Self> {
        check_variance(variance)?;
        Ok(Self::White { variance })
    }

    pub fn ar1(coefficient: f64, variance: f64, synthesis: Ar1Synthesis) -> Result<Self> {
        check_coefficient(coefficient)?;
        check_variance(variance)?;
        Ok(Self::Ar1 {
            coefficient,
            variance,
            synthesis,
        })
    }

    pub fn receiver_correlated(target: HermitianCovariance) -> Result<Self> {
        let first = target.entry(0, 0).re;
        check_variance(first)?;
        for i in 1..target.dim() {
            let d = target.entry(i, i).re;
            if (d - first).abs() > UNIT_DIAGONAL_TOLERANCE * first {
                return Err(Error::UnequalDiagonal {
                    first,
                    other: d,
                    index: i,
                });
            }
        }
        Ok(Self::ReceiverCorrelated { target })
    }

    /// Noise power `sigma_eta^2` per receiver.
    pub fn variance(&self) -> f64 {
        match self {
            Self::White { variance } | Self::Ar1 { variance, .. } => *variance,
            Self::ReceiverCorrelated { target } => target.entry(0, 0).re,
        }
    }

    pub fn is_white(&self) -> bool {
        match self {
            Self::White { .. } => true,
            Self::Ar1 { coefficient, .. } => *coefficient == 0.0,
            Self::ReceiverCorrelated { target } => {
                let g = target.dim();
                (0..g).all(|i| (0..g).all(|j| i == j || target.entry(i, j).norm() == 0.0))
            }
        }
    }

    /// Draws `len` samples for each of `receivers` receivers.
    ///
    /// Independent receivers use the sub-seed `derive_seed(seed, &[r])`.
    pub fn generate(&self, receivers: usize, len: usize, seed: u64) -> Result<SampleBlock> {
        if receivers == 0 {
            return Err(invalid("receivers", "must be at least 1"));
        }
        match self {
            Self::White { variance } => SampleBlock::new(
                (0..receivers)
                    .map(|r| white_noise(len, *variance, derive_seed(seed, &[r as u64])))
                    .collect::<Result<_>>()?,
            ),
            Self::Ar1 {
                coefficient,
                variance,
                synthesis,
            } => SampleBlock::new(
                (0..receivers)
                    .map(|r| {
                        let s = derive_seed(seed, &[r as u64]);
                        match synthesis {
                            Ar1Synthesis::Recursive => ar1_noise(len, *coefficient, *variance, s),
                            Ar1Synthesis::Spectral => psd_shaped_noise(
                                &SpectrumTarget::Ar1 {
                                    coefficient: *coefficient,
                                },
                                len,
                                *variance,
                                s,
                            ),
                        }
                    })
                    .collect::<Result<_>>()?,
            ),
            Self::ReceiverCorrelated { target } => {
                if target.dim() != receivers {
                    return Err(invalid(
                        "receivers",
                        format!(
                            "target covariance is {0}x{0} but {receivers} receivers requested",
                            target.dim()
                        ),
                    ));
                }
                cholesky_colored_noise(target, len, seed)
            }
        }
    }

    /// Statistical covariance of the stacked `p (Q + 1)` noise vector.
    pub fn covariance(&self, receivers: usize, smoothing: usize) -> Result<HermitianCovariance> {
        let q1 = smoothing + 1;
        let g = receivers * q1;
        let m = match self {
            Self::White { variance } => {
                CMatrix::from_diagonal_element(g, g, Complex64::new(*variance, 0.0))
            }
            Self::Ar1 {
                coefficient,
                variance,
                ..
            } => {
                let block = ar1_covariance(smoothing, *coefficient, *variance)?;
                CMatrix::from_fn(g, g, |i, j| {
                    if i / q1 == j / q1 {
                        block.entry(i % q1, j % q1)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            }
            Self::ReceiverCorrelated { target } => {
                if target.dim() != receivers {
                    return Err(invalid("receivers", "does not match target dimension"));
                }
                CMatrix::from_fn(g, g, |i, j| {
                    if i % q1 == j % q1 {
                        target.entry(i / q1, j / q1)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            }
        };
        Ok(HermitianCovariance::from_hermitian_unchecked(
            m,
            CovarianceKind::Statistical,
        ))
    }
}

fn check_variance(variance: f64) -> Result<()> {
    if variance > 0.0 && variance.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            "variance",
            format!("noise power {variance} must be positive"),
        ))
    }
}

fn check_coefficient(a: f64) -> Result<()> {
    if a.abs() < 1.0 {
        Ok(())
    } else {
        Err(invalid(
            "coefficient",
            format!("|a| = {} must be < 1", a.abs()),
        ))
    }
}

/// Normalized signal and noise correlation coefficients.
///
/// `noise_h1` holds the H1 noise coefficients and `noise_h0` the H0 ones.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationModel {
    signal: DMatrix<f64>,
    noise_h1: CMatrix,
    noise_h0: CMatrix,
}

impl CorrelationModel {
    pub fn new(signal: DMatrix<f64>, noise_h1: CMatrix, noise_h0: CMatrix) -> Result<Self> {
        let g = signal.nrows();
        if g == 0 {
            return Err(Error::Empty("correlation matrix"));
        }
        let signal_c = signal.map(|v| Complex64::new(v, 0.0));
        for (name, m) in [
            ("signal", &signal_c),
            ("noise_h1", &noise_h1),
            ("noise_h0", &noise_h0),
        ] {
            if m.shape() != (g, g) {
                return Err(invalid(
                    "correlation",
                    format!("{name} matrix is {:?}, expected ({g}, {g})", m.shape()),
                ));
            }
            check_correlation_matrix(name, m)?;
        }
        if let Some(v) = signal.iter().find(|&&v| v < 0.0) {
            return Err(invalid(
                "correlation",
                format!("signal correlation coefficient {v} is negative"),
            ));
        }
        Ok(Self {
            signal,
            noise_h1,
            noise_h0,
        })
    }

    /// White H1 noise, the given signal and H0 noise coefficients.
    pub fn with_white_h1(signal: DMatrix<f64>, noise_h0: CMatrix) -> Result<Self> {
        let g = signal.nrows();
        Self::new(signal, CMatrix::identity(g, g), noise_h0)
    }

    /// Normalizes a covariance by its (common) diagonal.
    pub fn coefficients_of(cov: &HermitianCovariance) -> Result<CMatrix> {
        let d = cov.entry(0, 0).re;
        if d <= 0.0 {
            return Err(invalid("covariance", "diagonal must be positive"));
        }
        Ok(cov.matrix().map(|v| v / d))
    }

    pub fn dim(&self) -> usize {
        self.signal.nrows()
    }

    pub fn signal(&self) -> &DMatrix<f64> {
        &self.signal
    }

    pub fn noise_h1(&self) -> &CMatrix {
        &self.noise_h1
    }

    pub fn noise_h0(&self) -> &CMatrix {
        &self.noise_h0
    }

    /// Largest off-diagonal modulus of the H0 noise coefficients.
    pub fn max_h0_noise_correlation(&self) -> f64 {
        max_off_diagonal(&self.noise_h0).map_or(0.0, |(_, _, v)| v.norm())
    }

    /// `max_i sum_{j != i} |rho^s_ij|`.
    pub fn kappa_max(&self) -> f64 {
        let g = self.dim();
        (0..g)
            .map(|i| {
                (0..g)
                    .filter(|&j| j != i)
                    .map(|j| self.signal[(i, j)].abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn h1_noise_is_white(&self) -> bool {
        max_off_diagonal(&self.noise_h1).is_none_or(|(_, _, v)| v.norm() == 0.0)
    }
}

/// First largest-modulus off-diagonal entry in a row-major scan of the upper
/// triangle.
pub(crate) fn max_off_diagonal(m: &CMatrix) -> Option<(usize, usize, Complex64)> {
    let g = m.nrows();
    let mut best: Option<(usize, usize, Complex64)> = None;
    for i in 0..g {
        for j in (i + 1)..g {
            let v = m[(i, j)];
            if best.is_none_or(|(_, _, b)| v.norm() > b.norm()) {
                best = Some((i, j, v));
            }
        }
    }
    best
}

fn check_correlation_matrix(name: &str, m: &CMatrix) -> Result<()> {
    let g = m.nrows();
    for i in 0..g {
        if (m[(i, i)] - Complex64::new(1.0, 0.0)).norm() > UNIT_DIAGONAL_TOLERANCE {
            return Err(invalid(
                "correlation",
                format!("{name} diagonal entry {i} is {} (expected 1)", m[(i, i)]),
            ));
        }
        for j in 0..g {
            let v = m[(i, j)];
            if v.norm() > 1.0 + UNIT_DIAGONAL_TOLERANCE {
                return Err(invalid(
                    "correlation",
                    format!("{name} entry ({i}, {j}) has modulus {} > 1", v.norm()),
                ));
            }
            if (v - m[(j, i)].conj()).norm() > UNIT_DIAGONAL_TOLERANCE {
                return Err(invalid(
                    "correlation",
                    format!("{name} matrix is not Hermitian"),
                ));
            }
        }
    }
    Ok(())
}

/// Circularly symmetric white Gaussian noise with power `variance`.
pub fn white_noise(len: usize, variance: f64, seed: u64) -> Result<Vec<Complex64>> {
    if len == 0 {
        return Err(invalid("length", "must be at least 1"));
    }
    check_variance(variance)?;
    let mut rng = rng_from_seed(seed);
    Ok((0..len)
        .map(|_| complex_gaussian(&mut rng, variance))
        .collect())
}

/// Innovation power that gives an AR(1) process of power `variance`.
pub fn ar1_innovation_variance(coefficient: f64, variance: f64) -> f64 {
    variance * (1.0 - coefficient * coefficient)
}

/// Stationary complex AR(1) noise, `eta(n) = a eta(n-1) + eps(n)`.
///
/// `eta(0)` is drawn at the full process power, so the output is stationary
/// from the first sample.
pub fn ar1_noise(len: usize, coefficient: f64, variance: f64, seed: u64) -> Result<Vec<Complex64>> {
    if len == 0 {
        return Err(invalid("length", "must be at least 1"));
    }
    check_coefficient(coefficient)?;
    check_variance(variance)?;
    let innovation = ar1_innovation_variance(coefficient, variance);
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(len);
    let mut prev = complex_gaussian(&mut rng, variance);
    out.push(prev);
    for _ in 1..len {
        prev = prev * coefficient + complex_gaussian(&mut rng, innovation);
        out.push(prev);
    }
    Ok(out)
}

/// `(Q + 1) x (Q + 1)` Toeplitz covariance with entries `sigma^2 a^|i-j|`.
pub fn ar1_covariance(
    smoothing: usize,
    coefficient: f64,
    variance: f64,
) -> Result<HermitianCovariance> {
    check_coefficient(coefficient)?;
    check_variance(variance)?;
    let n = smoothing + 1;
    let m = CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(variance * coefficient.powi(i.abs_diff(j) as i32), 0.0)
    });
    Ok(HermitianCovariance::from_hermitian_unchecked(
        m,
        CovarianceKind::Statistical,
    ))
}

/// Receiver-correlated noise: `eta(n) = L w(n)` with `L L^H = target`.
pub fn cholesky_colored_noise(
    target: &HermitianCovariance,
    len: usize,
    seed: u64,
) -> Result<SampleBlock> {
    if len == 0 {
        return Err(invalid("length", "must be at least 1"));
    }
    let p = target.dim();
    let factor = Cholesky::new(target.matrix().clone())
        .ok_or(Error::NotPositiveDefinite)?
        .unpack();
    if factor
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::NotPositiveDefinite);
    }
    let mut rng = rng_from_seed(seed);
    let mut receivers = vec![Vec::with_capacity(len); p];
    let mut w = DVector::<Complex64>::zeros(p);
    for _ in 0..len {
        for v in w.iter_mut() {
            *v = complex_gaussian(&mut rng, 1.0);
        }
        let eta = &factor * &w;
        for (rx, v) in receivers.iter_mut().zip(eta.iter()) {
            rx.push(*v);
        }
    }
    SampleBlock::new(receivers)
}

/// Target power spectrum for [`psd_shaped_noise`].
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumTarget {
    /// AR(1) spectrum `1 / |1 - a e^{-jw}|^2` (scale is irrelevant).
    Ar1 { coefficient: f64 },
    /// Autocorrelation at lags `0..L`, extended evenly and circularly to the
    /// block length before the DFT. Requires `2 L - 1 <= N`.
    Autocorrelation(Vec<f64>),
    /// Explicit spectrum on the `N` DFT bins.
    Spectrum(Vec<f64>),
}

impl SpectrumTarget {
    /// Power spectrum on the `len` DFT bins `w_k = 2 pi k / len`.
    pub fn bins(&self, len: usize) -> Result<Vec<f64>> {
        let raw = match self {
            Self::Ar1 { coefficient } => {
                check_coefficient(*coefficient)?;
                psd_of_ar1(*coefficient, 1.0, len)
            }
            Self::Spectrum(values) => {
                if values.len() != len {
                    return Err(invalid(
                        "spectrum",
                        format!("has {} bins, block length is {len}", values.len()),
                    ));
                }
                values.clone()
            }
            Self::Autocorrelation(lags) => {
                if lags.is_empty() {
                    return Err(Error::Empty("autocorrelation"));
                }
                if 2 * lags.len() - 1 > len {
                    return Err(invalid(
                        "autocorrelation",
                        format!("{} lags do not fit a block of {len}", lags.len()),
                    ));
                }
                let mut buf: Vec<Complex64> = (0..len)
                    .map(|k| {
                        let lag = k.min(len - k);
                        Complex64::new(lags.get(lag).copied().unwrap_or(0.0), 0.0)
                    })
                    .collect();
                FftPlanner::new().plan_fft_forward(len).process(&mut buf);
                buf.iter().map(|v| v.re).collect()
            }
        };
        let peak = raw.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (bin, &value) in raw.iter().enumerate() {
            if !value.is_finite() || value < -SPECTRUM_TOLERANCE * peak {
                return Err(Error::NegativeSpectrum { bin, value });
            }
        }
        Ok(raw.into_iter().map(|v| v.max(0.0)).collect())
    }
}

/// Gaussian noise with a prescribed power spectrum.
///
/// The output power `(1/N) sum |x(n)|^2` equals `variance` up to rounding.
pub fn psd_shaped_noise(
    target: &SpectrumTarget,
    len: usize,
    variance: f64,
    seed: u64,
) -> Result<Vec<Complex64>> {
    if len == 0 {
        return Err(invalid("length", "must be at least 1"));
    }
    check_variance(variance)?;
    let spectrum = target.bins(len)?;
    if spectrum.iter().all(|&v| v == 0.0) {
        return Err(invalid("spectrum", "is identically zero"));
    }
    let mut rng = rng_from_seed(seed);
    let mut buf: Vec<Complex64> = spectrum
        .iter()
        .map(|s| complex_gaussian(&mut rng, 1.0) * s.sqrt())
        .collect();
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
    let power = buf.iter().map(|v| v.norm_sqr()).sum::<f64>() / len as f64;
    let gain = (variance / power).sqrt();
    buf.iter_mut().for_each(|v| *v *= gain);
    Ok(buf)
}

/// AR(1) power spectrum `sigma_eps^2 / |1 - a e^{-jw}|^2` on `bins` uniform
/// frequencies in `[0, 2 pi)`.
pub fn psd_of_ar1(coefficient: f64, innovation_variance: f64, bins: usize) -> Vec<f64> {
    (0..bins)
        .map(|k| {
            let w = 2.0 * PI * k as f64 / bins as f64;
            let d = Complex64::new(1.0, 0.0) - Complex64::from_polar(coefficient, -w);
            innovation_variance / d.norm_sqr()
        })
        .collect()
}

/// Writes `(x, value)` pairs as a two-column CSV with a fixed header.
pub fn write_series_csv<W: Write>(
    out: &mut W,
    header: (&str, &str),
    rows: impl IntoIterator<Item = (f64, f64)>,
) -> io::Result<()> {
    writeln!(out, "{},{}", header.0, header.1)?;
    for (x, v) in rows {
        writeln!(out, "{x:.16e},{v:.16e}")?;
    }
    Ok(())
}

/// Figure-style AR(1) PSD diagnostic: `frequency,value` with frequency in
/// radians per sample.
pub fn write_ar1_psd_csv<W: Write>(
    out: &mut W,
    coefficient: f64,
    innovation_variance: f64,
    bins: usize,
) -> io::Result<()> {
    let psd = psd_of_ar1(coefficient, innovation_variance, bins);
    write_series_csv(
        out,
        ("frequency", "value"),
        psd.into_iter()
            .enumerate()
            .map(|(k, v)| (2.0 * PI * k as f64 / bins as f64, v)),
    )
}
