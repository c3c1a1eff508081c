use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;
use snrwall_core::bounds::{
    h0_statistic_lower_bound, kappa_max_for, nonrobustness_inequality, snr_wall_lower_bound,
    BoundReport, KappaCase,
};
use snrwall_core::detector::Hypothesis;
use snrwall_core::model::Snr;
use snrwall_core::montecarlo::{
    empirical_wall_search, run_scenario, summarize_cells, write_histogram_csv, write_samples_csv,
    CellSummary, ScenarioConfig, StatisticSample, WallSearch,
};
use snrwall_core::noise::{
    ar1_innovation_variance, write_ar1_psd_csv, CorrelationModel, NoiseModel,
};

use crate::scenario::{Preset, ScenarioFile, DEFAULT_N_MAX, LONG_N_MAX};

/// Inputs of the `bound` command.
#[derive(Debug, Clone, Default)]
pub struct BoundRequest {
    pub receivers: Option<usize>,
    pub smoothing: Option<usize>,
    pub oversampling: usize,
    /// Largest H0 noise correlation; taken from the model when absent.
    pub rho_max: Option<f64>,
    pub model: Option<CorrelationModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundOutcome {
    /// `None` when `kappa_max` came from a correlation-model file.
    pub case: Option<KappaCase>,
    pub rho_max: f64,
    pub report: BoundReport,
    /// Result of the general inequality at the wall when the model has
    /// correlated H1 noise.
    pub nonrobust_at_wall: Option<bool>,
}

impl BoundOutcome {
    pub fn render(&self) -> String {
        let r = &self.report;
        let mut s = String::new();
        if let Some(case) = self.case {
            s.push_str(&format!("case: {case:?}\n"));
        }
        s.push_str(&format!("rho_max: {}\n", self.rho_max));
        s.push_str(&format!("kappa_max: {}\n", r.kappa_max));
        s.push_str(&format!("alpha_max: {:.12}\n", r.alpha_max));
        if r.validity_snr_cap.is_finite() {
            s.push_str(&format!("validity_snr_cap: {}\n", r.validity_snr_cap));
        } else {
            s.push_str("validity_snr_cap: unbounded\n");
        }
        match r.undefined_reason() {
            None => {
                s.push_str(&format!("wall_linear: {:.9}\n", r.wall_linear));
                s.push_str(&format!("wall_db: {:.6}\n", r.wall_db));
            }
            Some(reason) => s.push_str(&format!("bound undefined: {reason}\n")),
        }
        if let Some(flag) = self.nonrobust_at_wall {
            s.push_str(&format!(
                "general inequality holds at wall (correlated H1 noise): {flag}\n"
            ));
        }
        s
    }
}

pub fn cmd_bound(request: &BoundRequest) -> anyhow::Result<BoundOutcome> {
    let (case, kappa) = match &request.model {
        Some(model) => (None, model.kappa_max()),
        None => {
            let (Some(p), Some(q)) = (request.receivers, request.smoothing) else {
                bail!("bound needs --receivers and --smoothing (or --model)");
            };
            (
                Some(KappaCase::of(p, q)),
                kappa_max_for(p, q, request.oversampling)?,
            )
        }
    };
    let rho_max = match (request.rho_max, &request.model) {
        (Some(rho), _) => rho,
        (None, Some(model)) => model.max_h0_noise_correlation(),
        (None, None) => bail!("bound needs --rho-max"),
    };
    if !(rho_max > 0.0 && rho_max < 1.0) {
        bail!("bound undefined: rho_max = {rho_max} must lie in (0, 1)");
    }
    let report = snr_wall_lower_bound(h0_statistic_lower_bound(rho_max)?, kappa)?;
    let nonrobust_at_wall = match &request.model {
        Some(model) if report.defined && !model.h1_noise_is_white() => {
            let snr = Snr::from_linear(report.wall_linear)?;
            nonrobustness_inequality(model, snr, rho_max).ok()
        }
        _ => None,
    };
    Ok(BoundOutcome {
        case,
        rho_max,
        report,
        nonrobust_at_wall,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Options shared by `simulate` and `wall-search`.
#[derive(Debug, Clone, Default)]
pub struct ScenarioOverrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub n_max: Option<usize>,
    pub instances: Option<usize>,
    pub long: bool,
    pub h0_white: bool,
}

/// Loads a preset or a scenario file and applies command-line overrides.
///
/// Presets are capped at `--n-max` (default 10^5, or 10^6 with `--long`);
/// scenario files only when `--n-max` is given.
pub fn resolve_scenario(
    preset: Option<Preset>,
    path: Option<&Path>,
    overrides: &ScenarioOverrides,
) -> anyhow::Result<ScenarioFile> {
    let mut file = match (preset, path) {
        (Some(p), None) => {
            let mut f = p.scenario();
            let default_cap = if overrides.long {
                LONG_N_MAX
            } else {
                DEFAULT_N_MAX
            };
            f.cap_sample_counts(overrides.n_max.unwrap_or(default_cap));
            f
        }
        (None, Some(path)) => {
            let mut f = ScenarioFile::load(path)?;
            if let Some(n_max) = overrides.n_max {
                f.cap_sample_counts(n_max);
            }
            f
        }
        _ => bail!("give exactly one of --scenario or --preset"),
    };
    if let Some(seed) = overrides.seed {
        file.seed = seed;
    }
    if let Some(instances) = overrides.instances {
        file.instances = instances;
    }
    if let Some(out) = &overrides.out {
        file.output_dir = out.clone();
    }
    if overrides.h0_white {
        file.h0_noise = crate::scenario::NoiseSpec::White {};
    }
    Ok(file)
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub samples: Vec<StatisticSample>,
    pub cells: Vec<CellSummary>,
    pub files: Vec<PathBuf>,
}

fn histogram_name(cell: &CellSummary) -> String {
    match (cell.hypothesis, cell.snr_db) {
        (Hypothesis::H1, Some(db)) => format!("h1_snr{db}_N{}.csv", cell.n),
        _ => format!("h0_N{}.csv", cell.n),
    }
}

/// Runs the scenario and writes `samples.csv`, one histogram CSV per cell
/// under `histograms/`, `summary.json` and, for AR(1) H0 noise, `h0_psd.csv`.
pub fn cmd_simulate(config: &ScenarioConfig, out_dir: &Path) -> anyhow::Result<SimulateOutcome> {
    let samples = run_scenario(config)?;
    let cells = summarize_cells(&samples, config.bins)?;

    let hist_dir = out_dir.join("histograms");
    fs::create_dir_all(&hist_dir).with_context(|| format!("creating {}", hist_dir.display()))?;
    let mut files = Vec::new();

    let path = out_dir.join("samples.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    write_samples_csv(&mut w, &samples)?;
    w.flush()?;
    files.push(path);

    for cell in &cells {
        let path = hist_dir.join(histogram_name(cell));
        let mut w = BufWriter::new(File::create(&path)?);
        write_histogram_csv(&mut w, &cell.summary)?;
        w.flush()?;
        files.push(path);
    }

    let path = out_dir.join("summary.json");
    write_json(&path, &cells)?;
    files.push(path);

    if let NoiseModel::Ar1 {
        coefficient,
        variance,
        ..
    } = &config.h0_noise
    {
        let path = out_dir.join("h0_psd.csv");
        let mut w = BufWriter::new(File::create(&path)?);
        write_ar1_psd_csv(
            &mut w,
            *coefficient,
            ar1_innovation_variance(*coefficient, *variance),
            512,
        )?;
        w.flush()?;
        files.push(path);
    }

    Ok(SimulateOutcome {
        samples,
        cells,
        files,
    })
}

/// Parses a comma-separated dB list such as `-6,-7,-8`.
pub fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("bad grid value `{v}`"))
        })
        .collect()
}

pub fn render_wall_search(result: &WallSearch) -> String {
    let mut s = format!("N = {}\nH0 median: {:.9}\n", result.n, result.h0_median);
    for (db, m) in &result.h1_medians {
        s.push_str(&format!("H1 median at {db} dB: {m:.9}\n"));
    }
    match result.crossing {
        Some((hi, lo)) => s.push_str(&format!("crossing between {hi} dB and {lo} dB\n")),
        None => s.push_str("no crossing\n"),
    }
    s
}

/// Runs the median search and writes `wall_search.json`.
pub fn cmd_wall_search(
    config: &ScenarioConfig,
    grid_db: &[f64],
    out_dir: &Path,
) -> anyhow::Result<WallSearch> {
    let result = empirical_wall_search(config, grid_db)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    write_json(&out_dir.join("wall_search.json"), &result)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_receiver_case() {
        let out = cmd_bound(&BoundRequest {
            receivers: Some(2),
            smoothing: Some(0),
            oversampling: 4,
            rho_max: Some(0.05),
            model: None,
        })
        .unwrap();
        assert_eq!(out.case, Some(KappaCase::Receiver));
        assert!((out.report.wall_db + 12.788).abs() < 1e-3);
        assert!(out.render().contains("wall_db: -12.78"));
    }

    #[test]
    fn bound_single_receiver_without_smoothing_is_undefined() {
        let out = cmd_bound(&BoundRequest {
            receivers: Some(1),
            smoothing: Some(0),
            oversampling: 4,
            rho_max: Some(0.05),
            model: None,
        })
        .unwrap();
        assert!(!out.report.defined);
        assert!(out.render().contains("bound undefined: kappa_max = 0 < 1"));
    }

    #[test]
    fn bound_rejects_rho_outside_unit_interval() {
        for rho in [0.0, 1.0, 1.5] {
            let err = cmd_bound(&BoundRequest {
                receivers: Some(2),
                smoothing: Some(0),
                oversampling: 4,
                rho_max: Some(rho),
                model: None,
            })
            .unwrap_err();
            assert!(err.to_string().contains("bound undefined"));
        }
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("-6, -7,-8.5").unwrap(), vec![-6.0, -7.0, -8.5]);
        assert!(parse_grid("-6,x").is_err());
    }

    #[test]
    fn preset_resolution() {
        let f = resolve_scenario(
            Some(Preset::ReproduceFig2),
            None,
            &ScenarioOverrides::default(),
        )
        .unwrap();
        assert_eq!(f.sample_counts, vec![999, 9999, 99_999]);
        let f = resolve_scenario(
            Some(Preset::ReproduceFig2),
            None,
            &ScenarioOverrides {
                long: true,
                instances: Some(10),
                seed: Some(3),
                h0_white: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(f.sample_counts, vec![999, 9999, 999_999]);
        assert_eq!((f.instances, f.seed), (10, 3));
        assert_eq!(f.h0_noise, crate::scenario::NoiseSpec::White {});
        assert!(resolve_scenario(None, None, &ScenarioOverrides::default()).is_err());
    }
}
