//! Scenario files and the built-in figure presets.
//!
//! A scenario is a TOML document. SNRs are in dB, variances are linear
//! powers and correlation matrices hold normalized coefficients (the noise
//! power is applied on top):
//!
//! ```toml
//! receivers = 2
//! smoothing = 0
//! oversampling = 4
//! sample_counts = [999, 9999]
//! snr_db = [-10, -11, -12]
//! noise_variance = 1.0
//! instances = 500
//! bins = 12
//! seed = 1
//! output_dir = "out/receiver"
//!
//! [h0_noise]
//! kind = "receiver_correlated"
//! correlation = [[1.0, 0.05], [0.05, 1.0]]
//!
//! [h1_noise]
//! kind = "white"
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use snrwall_core::montecarlo::ScenarioConfig;
use snrwall_core::noise::{Ar1Synthesis, CorrelationModel, NoiseModel};
use snrwall_core::{CMatrix, Complex64, CovarianceKind, HermitianCovariance};

/// Desk-scale cap on block lengths for presets.
pub const DEFAULT_N_MAX: usize = 100_000;
/// Cap that restores the full table of block lengths.
pub const LONG_N_MAX: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    White {},
    Ar1 {
        coefficient: f64,
        #[serde(default)]
        synthesis: Ar1Synthesis,
    },
    ReceiverCorrelated {
        correlation: Vec<Vec<f64>>,
        #[serde(default)]
        correlation_imag: Option<Vec<Vec<f64>>>,
    },
}

impl NoiseSpec {
    pub fn build(&self, variance: f64) -> anyhow::Result<NoiseModel> {
        Ok(match self {
            Self::White {} => NoiseModel::white(variance)?,
            Self::Ar1 {
                coefficient,
                synthesis,
            } => NoiseModel::ar1(*coefficient, variance, *synthesis)?,
            Self::ReceiverCorrelated {
                correlation,
                correlation_imag,
            } => {
                let m =
                    complex_matrix(correlation, correlation_imag.as_ref())?.map(|v| v * variance);
                NoiseModel::receiver_correlated(HermitianCovariance::new(
                    m,
                    CovarianceKind::Statistical,
                )?)?
            }
        })
    }
}

/// Builds a complex matrix from real and optional imaginary row lists.
pub fn complex_matrix(re: &[Vec<f64>], im: Option<&Vec<Vec<f64>>>) -> anyhow::Result<CMatrix> {
    let n = re.len();
    if n == 0 || re.iter().any(|r| r.len() != n) {
        bail!("matrix must be square and non-empty");
    }
    if let Some(im) = im {
        if im.len() != n || im.iter().any(|r| r.len() != n) {
            bail!("imaginary part must match the real part's shape");
        }
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(re[i][j], im.map_or(0.0, |m| m[i][j]))
    }))
}

/// On-disk scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub receivers: usize,
    pub smoothing: usize,
    pub oversampling: usize,
    pub sample_counts: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub noise_variance: f64,
    pub instances: usize,
    pub bins: usize,
    pub seed: u64,
    pub h0_noise: NoiseSpec,
    pub h1_noise: NoiseSpec,
    pub output_dir: PathBuf,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        Self::from_str(&text).with_context(|| format!("parsing scenario {}", path.display()))
    }

    pub fn to_config(&self) -> anyhow::Result<ScenarioConfig> {
        let config = ScenarioConfig {
            receivers: self.receivers,
            smoothing: self.smoothing,
            oversampling: self.oversampling,
            sample_counts: self.sample_counts.clone(),
            snr_db: self.snr_db.clone(),
            h0_noise: self
                .h0_noise
                .build(self.noise_variance)
                .context("h0_noise")?,
            h1_noise: self
                .h1_noise
                .build(self.noise_variance)
                .context("h1_noise")?,
            instances: self.instances,
            bins: self.bins,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// Replaces every block length `>= n_max` by `n_max - 1`, following the
    /// `10^k - 1` convention of the presets, and drops duplicates.
    pub fn cap_sample_counts(&mut self, n_max: usize) {
        let mut capped: Vec<usize> = Vec::new();
        for &n in &self.sample_counts {
            let n = if n >= n_max {
                n_max.saturating_sub(1)
            } else {
                n
            };
            if !capped.contains(&n) {
                capped.push(n);
            }
        }
        self.sample_counts = capped;
    }
}

impl FromStr for ScenarioFile {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(s)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Two synchronized receivers, receiver-correlated H0 noise.
    #[value(name = "reproduce-fig2")]
    ReproduceFig2,
    /// One receiver with smoothing, AR(1) H0 noise.
    #[value(name = "reproduce-fig3")]
    ReproduceFig3,
}

const TABLE_SAMPLE_COUNTS: [usize; 3] = [999, 9999, 999_999];
const TABLE_INSTANCES: usize = 2000;
const TABLE_BINS: usize = 12;
const TABLE_OVERSAMPLING: usize = 4;
const PRESET_SEED: u64 = 20_170_901;

impl Preset {
    pub fn scenario(self) -> ScenarioFile {
        let (receivers, smoothing, snr_db, h0_noise, dir) = match self {
            Self::ReproduceFig2 => (
                2,
                0,
                (10..=15).map(|v| -(v as f64)).collect(),
                NoiseSpec::ReceiverCorrelated {
                    correlation: vec![vec![1.0, 0.05], vec![0.05, 1.0]],
                    correlation_imag: None,
                },
                "out/reproduce-fig2",
            ),
            Self::ReproduceFig3 => (
                1,
                4,
                (6..=10).map(|v| -(v as f64)).collect(),
                NoiseSpec::Ar1 {
                    coefficient: 0.1,
                    synthesis: Ar1Synthesis::Spectral,
                },
                "out/reproduce-fig3",
            ),
        };
        ScenarioFile {
            receivers,
            smoothing,
            oversampling: TABLE_OVERSAMPLING,
            sample_counts: TABLE_SAMPLE_COUNTS.to_vec(),
            snr_db,
            noise_variance: 1.0,
            instances: TABLE_INSTANCES,
            bins: TABLE_BINS,
            seed: PRESET_SEED,
            h0_noise,
            h1_noise: NoiseSpec::White {},
            output_dir: PathBuf::from(dir),
        }
    }
}

/// Correlation-model file for `bound --model`.
///
/// `noise_h1` defaults to the identity (white H1 noise).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationModelFile {
    pub signal: Vec<Vec<f64>>,
    pub noise_h0: Vec<Vec<f64>>,
    #[serde(default)]
    pub noise_h0_imag: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub noise_h1: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub noise_h1_imag: Option<Vec<Vec<f64>>>,
}

impl CorrelationModelFile {
    pub fn load(path: &Path) -> anyhow::Result<CorrelationModel> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading correlation model {}", path.display()))?;
        let file: Self = toml::from_str(&text)
            .with_context(|| format!("parsing correlation model {}", path.display()))?;
        file.build()
    }

    pub fn build(&self) -> anyhow::Result<CorrelationModel> {
        let g = self.signal.len();
        let signal = complex_matrix(&self.signal, None)?.map(|v| v.re);
        let noise_h0 = complex_matrix(&self.noise_h0, self.noise_h0_imag.as_ref())?;
        let noise_h1 = match &self.noise_h1 {
            Some(re) => complex_matrix(re, self.noise_h1_imag.as_ref())?,
            None => CMatrix::identity(g, g),
        };
        Ok(CorrelationModel::new(
            DMatrix::from_fn(g, g, |i, j| signal[(i, j)]),
            noise_h1,
            noise_h0,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
receivers = 2
smoothing = 0
oversampling = 4
sample_counts = [999, 9999]
snr_db = [-10, -11, -12]
noise_variance = 1.0
instances = 5
bins = 12
seed = 1
output_dir = "out/receiver"

[h0_noise]
kind = "receiver_correlated"
correlation = [[1.0, 0.05], [0.05, 1.0]]

[h1_noise]
kind = "white"
"#;

    #[test]
    fn parses_documented_example() {
        let file: ScenarioFile = EXAMPLE.parse().unwrap();
        assert_eq!(file.snr_db, vec![-10.0, -11.0, -12.0]);
        let config = file.to_config().unwrap();
        assert_eq!(config.receivers, 2);
        assert!(matches!(
            config.h0_noise,
            NoiseModel::ReceiverCorrelated { .. }
        ));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = EXAMPLE.replace("bins = 12", "bins = 12\nbogus = 3");
        assert!(text.parse::<ScenarioFile>().is_err());
        let text = EXAMPLE.replace("kind = \"white\"", "kind = \"white\"\nextra = 1");
        assert!(text.parse::<ScenarioFile>().is_err());
    }

    #[test]
    fn missing_keys_rejected() {
        let text = EXAMPLE.replace("seed = 1\n", "");
        assert!(text.parse::<ScenarioFile>().is_err());
    }

    #[test]
    fn ar1_spec_defaults_to_spectral() {
        let text = EXAMPLE.replace(
            "kind = \"receiver_correlated\"\ncorrelation = [[1.0, 0.05], [0.05, 1.0]]",
            "kind = \"ar1\"\ncoefficient = 0.1",
        );
        let file: ScenarioFile = text.parse().unwrap();
        assert_eq!(
            file.h0_noise,
            NoiseSpec::Ar1 {
                coefficient: 0.1,
                synthesis: Ar1Synthesis::Spectral
            }
        );
    }

    #[test]
    fn presets_follow_table_values() {
        let fig2 = Preset::ReproduceFig2.scenario();
        assert_eq!(fig2.snr_db, vec![-10.0, -11.0, -12.0, -13.0, -14.0, -15.0]);
        assert_eq!(fig2.instances, 2000);
        assert_eq!(fig2.bins, 12);
        assert_eq!(fig2.sample_counts, vec![999, 9999, 999_999]);
        let fig3 = Preset::ReproduceFig3.scenario();
        assert_eq!(
            (fig3.receivers, fig3.smoothing, fig3.oversampling),
            (1, 4, 4)
        );
        assert_eq!(fig3.snr_db, vec![-6.0, -7.0, -8.0, -9.0, -10.0]);
    }

    #[test]
    fn caps_sample_counts() {
        let mut fig2 = Preset::ReproduceFig2.scenario();
        fig2.cap_sample_counts(DEFAULT_N_MAX);
        assert_eq!(fig2.sample_counts, vec![999, 9999, 99_999]);
        let mut fig2 = Preset::ReproduceFig2.scenario();
        fig2.cap_sample_counts(LONG_N_MAX);
        assert_eq!(fig2.sample_counts, vec![999, 9999, 999_999]);
    }

    #[test]
    fn preset_round_trips_through_toml() {
        let fig3 = Preset::ReproduceFig3.scenario();
        let text = toml::to_string(&fig3).unwrap();
        assert_eq!(text.parse::<ScenarioFile>().unwrap(), fig3);
    }
}
