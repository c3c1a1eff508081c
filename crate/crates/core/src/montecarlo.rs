//! Seeded Monte Carlo engine for the MME statistic under both hypotheses.
//!
//! Instance seeds are `derive_seed(master, &[hyp, N, snr_index, instance])`
//! with `hyp = 0` for H0 (and `snr_index = 0`) and `hyp = 1` for H1. Inside an
//! H1 instance the signal uses `derive_seed(seed, &[0])` and the noise
//! `derive_seed(seed, &[1])`. Instances run in parallel; results are collected
//! in index order, so output never depends on scheduling.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::detector::{block_sample_covariance, mme_statistic, Hypothesis, DEFAULT_LAMBDA_FLOOR};
use crate::error::{invalid, Error, Result};
use crate::model::{generate_bpsk_signal, SignalModelParams, Snr};
use crate::noise::NoiseModel;
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub receivers: usize,
    pub smoothing: usize,
    pub oversampling: usize,
    pub sample_counts: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub h0_noise: NoiseModel,
    pub h1_noise: NoiseModel,
    pub instances: usize,
    pub bins: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.receivers == 0 {
            return Err(invalid("receivers", "p must be at least 1"));
        }
        if self.oversampling == 0 {
            return Err(invalid("oversampling", "M must be at least 1"));
        }
        if self.instances == 0 {
            return Err(invalid("instances", "must be at least 1"));
        }
        if self.bins < 2 {
            return Err(invalid("bins", "must be at least 2"));
        }
        if self.sample_counts.is_empty() {
            return Err(invalid("sample_counts", "at least one N is required"));
        }
        if let Some(&n) = self.sample_counts.iter().find(|&&n| n <= self.smoothing) {
            return Err(Error::BlockTooShort {
                samples: n,
                smoothing: self.smoothing,
            });
        }
        if let Some(db) = self.snr_db.iter().find(|v| !v.is_finite()) {
            return Err(invalid("snr_db", format!("{db} is not finite")));
        }
        let (v0, v1) = (self.h0_noise.variance(), self.h1_noise.variance());
        if (v0 - v1).abs() > 1e-12 * v1 {
            return Err(invalid(
                "noise variance",
                format!("H0 ({v0}) and H1 ({v1}) noise powers differ"),
            ));
        }
        Ok(())
    }

    /// Noise power `sigma_eta^2`; the signal power is `SNR * sigma_eta^2`.
    pub fn noise_variance(&self) -> f64 {
        self.h1_noise.variance()
    }

    pub fn largest_n(&self) -> usize {
        self.sample_counts.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatisticSample {
    pub hypothesis: Hypothesis,
    /// `None` under H0.
    pub snr_db: Option<f64>,
    pub snr_index: Option<usize>,
    pub n: usize,
    pub instance: usize,
    /// MME statistic, `f64::INFINITY` when the smallest eigenvalue vanished.
    pub statistic: f64,
    pub seed: u64,
}

fn h0_seed(master: u64, n: usize, instance: usize) -> u64 {
    derive_seed(master, &[0, n as u64, 0, instance as u64])
}

fn h1_seed(master: u64, n: usize, snr_index: usize, instance: usize) -> u64 {
    derive_seed(master, &[1, n as u64, snr_index as u64, instance as u64])
}

fn with_context<T>(result: Result<T>, context: impl FnOnce() -> String) -> Result<T> {
    result.map_err(|e| Error::Scenario {
        context: context(),
        source: Box::new(e),
    })
}

/// One H0 statistic: colored noise only.
pub fn h0_statistic(config: &ScenarioConfig, n: usize, seed: u64) -> Result<f64> {
    let block = config.h0_noise.generate(config.receivers, n, seed)?;
    let cov = block_sample_covariance(&block, config.smoothing)?;
    Ok(mme_statistic(&cov, DEFAULT_LAMBDA_FLOOR))
}

/// One H1 statistic: oversampled BPSK on every receiver plus H1 noise.
pub fn h1_statistic(config: &ScenarioConfig, n: usize, snr: Snr, seed: u64) -> Result<f64> {
    let params = SignalModelParams::new(
        config.oversampling,
        snr.linear() * config.noise_variance(),
        config.receivers,
        config.smoothing,
    )?;
    let symbols = n.div_ceil(config.oversampling) + 1;
    let mut signal = generate_bpsk_signal(symbols, &params, derive_seed(seed, &[0]))?;
    signal.truncate(n);
    let mut block = config
        .h1_noise
        .generate(config.receivers, n, derive_seed(seed, &[1]))?;
    block.add_common(&signal)?;
    let cov = block_sample_covariance(&block, config.smoothing)?;
    Ok(mme_statistic(&cov, DEFAULT_LAMBDA_FLOOR))
}

fn h0_cell(config: &ScenarioConfig, n: usize) -> Result<Vec<StatisticSample>> {
    (0..config.instances)
        .into_par_iter()
        .map(|instance| {
            let seed = h0_seed(config.seed, n, instance);
            let statistic = with_context(h0_statistic(config, n, seed), || {
                format!("H0, N = {n}, instance {instance}")
            })?;
            Ok(StatisticSample {
                hypothesis: Hypothesis::H0,
                snr_db: None,
                snr_index: None,
                n,
                instance,
                statistic,
                seed,
            })
        })
        .collect()
}

fn h1_cell(
    config: &ScenarioConfig,
    n: usize,
    snr_index: usize,
    snr_db: f64,
) -> Result<Vec<StatisticSample>> {
    let snr = Snr::from_db(snr_db)?;
    (0..config.instances)
        .into_par_iter()
        .map(|instance| {
            let seed = h1_seed(config.seed, n, snr_index, instance);
            let statistic = with_context(h1_statistic(config, n, snr, seed), || {
                format!("H1, SNR = {snr_db} dB, N = {n}, instance {instance}")
            })?;
            Ok(StatisticSample {
                hypothesis: Hypothesis::H1,
                snr_db: Some(snr_db),
                snr_index: Some(snr_index),
                n,
                instance,
                statistic,
                seed,
            })
        })
        .collect()
}

/// Runs every `(N, hypothesis, SNR)` cell of the scenario.
///
/// Output order: for each N, the H0 cell followed by one H1 cell per SNR, each
/// in instance order.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<StatisticSample>> {
    config.validate()?;
    let mut out = Vec::with_capacity(
        config.instances * config.sample_counts.len() * (1 + config.snr_db.len()),
    );
    for &n in &config.sample_counts {
        out.extend(h0_cell(config, n)?);
        for (k, &db) in config.snr_db.iter().enumerate() {
            out.extend(h1_cell(config, n, k, db)?);
        }
    }
    Ok(out)
}

/// Histogram and location summary of one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramSummary {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub median: f64,
    pub mean: f64,
    pub lower_quartile: f64,
    pub upper_quartile: f64,
    /// Finite samples (the ones binned).
    pub count: usize,
    /// Infinite statistics, tallied apart from the bins.
    pub sentinels: usize,
}

impl HistogramSummary {
    pub fn interquartile_range(&self) -> f64 {
        self.upper_quartile - self.lower_quartile
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Median with the midpoint rule for even counts.
pub fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Equal-width histogram over `[min, max]` of the finite values; the last bin
/// is closed on the right.
pub fn summarize(values: &[f64], bins: usize) -> Result<HistogramSummary> {
    if values.is_empty() {
        return Err(Error::Empty("histogram cell"));
    }
    if bins < 2 {
        return Err(invalid("bins", "must be at least 2"));
    }
    let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let sentinels = values.len() - finite.len();
    if finite.is_empty() {
        return Ok(HistogramSummary {
            edges: Vec::new(),
            counts: Vec::new(),
            median: f64::INFINITY,
            mean: f64::INFINITY,
            lower_quartile: f64::INFINITY,
            upper_quartile: f64::INFINITY,
            count: 0,
            sentinels,
        });
    }
    finite.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (finite[0], finite[finite.len() - 1]);
    if lo == hi {
        let pad = 1e-9 * lo.abs().max(1.0);
        lo -= pad;
        hi += pad;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|k| if k == bins { hi } else { lo + width * k as f64 })
        .collect();
    let mut counts = vec![0usize; bins];
    for &v in &finite {
        let k = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(HistogramSummary {
        median: median(&finite),
        mean: finite.iter().sum::<f64>() / finite.len() as f64,
        lower_quartile: quantile(&finite, 0.25),
        upper_quartile: quantile(&finite, 0.75),
        count: finite.len(),
        sentinels,
        edges,
        counts,
    })
}

/// Summary of one `(hypothesis, SNR, N)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub hypothesis: Hypothesis,
    pub snr_db: Option<f64>,
    pub n: usize,
    #[serde(flatten)]
    pub summary: HistogramSummary,
}

/// Groups samples by cell and summarizes each one. Cells are ordered by N,
/// hypothesis and SNR index.
pub fn summarize_cells(samples: &[StatisticSample], bins: usize) -> Result<Vec<CellSummary>> {
    let mut cells: BTreeMap<(usize, Hypothesis, Option<usize>), (Option<f64>, Vec<f64>)> =
        BTreeMap::new();
    for s in samples {
        cells
            .entry((s.n, s.hypothesis, s.snr_index))
            .or_insert_with(|| (s.snr_db, Vec::new()))
            .1
            .push(s.statistic);
    }
    cells
        .into_iter()
        .map(|((n, hypothesis, _), (snr_db, values))| {
            Ok(CellSummary {
                hypothesis,
                snr_db,
                n,
                summary: summarize(&values, bins)?,
            })
        })
        .collect()
}

/// Median comparison along a descending SNR grid at the largest N.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallSearch {
    pub n: usize,
    pub h0_median: f64,
    /// `(snr_db, H1 median)` per grid point.
    pub h1_medians: Vec<(f64, f64)>,
    /// `(hi, lo)` with `median_H1(hi) >= median_H0 > median_H1(lo)`.
    pub crossing: Option<(f64, f64)>,
}

pub fn empirical_wall_search(config: &ScenarioConfig, grid_db: &[f64]) -> Result<WallSearch> {
    config.validate()?;
    if grid_db.len() < 2 {
        return Err(invalid("grid", "needs at least two SNR values"));
    }
    if grid_db.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(invalid("grid", "must be strictly descending"));
    }
    let n = config.largest_n();
    let cell_median = |cell: Vec<StatisticSample>| -> Result<f64> {
        let values: Vec<f64> = cell.iter().map(|s| s.statistic).collect();
        Ok(summarize(&values, config.bins)?.median)
    };
    let h0_median = cell_median(h0_cell(config, n)?)?;
    let h1_medians = grid_db
        .iter()
        .enumerate()
        .map(|(k, &db)| Ok((db, cell_median(h1_cell(config, n, k, db)?)?)))
        .collect::<Result<Vec<_>>>()?;
    let crossing = h1_medians
        .windows(2)
        .find(|w| w[0].1 >= h0_median && w[1].1 < h0_median)
        .map(|w| (w[0].0, w[1].0));
    Ok(WallSearch {
        n,
        h0_median,
        h1_medians,
        crossing,
    })
}

fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// `hypothesis,snr_db,N,instance,statistic`; `snr_db` is empty under H0.
pub fn write_samples_csv<W: Write>(out: &mut W, samples: &[StatisticSample]) -> io::Result<()> {
    writeln!(out, "hypothesis,snr_db,N,instance,statistic")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.hypothesis,
            s.snr_db.map(fmt_float).unwrap_or_default(),
            s.n,
            s.instance,
            fmt_float(s.statistic)
        )?;
    }
    Ok(())
}

/// `bin_left,bin_right,count` per bin.
pub fn write_histogram_csv<W: Write>(out: &mut W, summary: &HistogramSummary) -> io::Result<()> {
    writeln!(out, "bin_left,bin_right,count")?;
    for (k, count) in summary.counts.iter().enumerate() {
        writeln!(
            out,
            "{},{},{}",
            fmt_float(summary.edges[k]),
            fmt_float(summary.edges[k + 1]),
            count
        )?;
    }
    Ok(())
}
