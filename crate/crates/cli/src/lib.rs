//! Command-line front end: analytic bounds, Monte Carlo runs and the
//! empirical wall search, all writing plot-ready CSV/JSON files.

pub mod commands;
pub mod scenario;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::{BoundRequest, ScenarioOverrides};
use scenario::{CorrelationModelFile, Preset};

#[derive(Debug, Parser)]
#[command(
    name = "snrwall",
    version,
    about = "SNR-wall bounds and MME detector simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form SNR-wall lower bound.
    Bound(BoundArgs),
    /// Monte Carlo statistics, histograms and summaries.
    Simulate(ScenarioArgs),
    /// Median-crossing search along a descending SNR grid.
    WallSearch(WallSearchArgs),
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Number of receivers p.
    #[arg(short = 'p', long)]
    pub receivers: Option<usize>,
    /// Smoothing Q (each receiver contributes Q + 1 samples).
    #[arg(short = 'q', long)]
    pub smoothing: Option<usize>,
    /// Oversampling factor M.
    #[arg(short = 'm', long, default_value_t = 4)]
    pub oversampling: usize,
    /// Largest H0 noise correlation modulus, in (0, 1).
    #[arg(long)]
    pub rho_max: Option<f64>,
    /// TOML correlation model (signal, noise_h0, optional noise_h1).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Directory for bound.json.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario TOML file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub scenario: Option<PathBuf>,
    /// Built-in scenario.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (overrides the scenario's output_dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Block lengths at or above this value become n_max - 1.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub instances: Option<usize>,
    /// Full-length presets (N up to 999999).
    #[arg(long)]
    pub long: bool,
}

#[derive(Debug, Args)]
pub struct WallSearchArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Descending dB grid, e.g. "-6,-7,-8,-9,-10". Defaults to the scenario SNRs.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Replace the H0 noise with white noise.
    #[arg(long)]
    pub h0_white: bool,
}

impl ScenarioArgs {
    fn overrides(&self, h0_white: bool) -> ScenarioOverrides {
        ScenarioOverrides {
            seed: self.seed,
            out: self.out.clone(),
            n_max: self.n_max,
            instances: self.instances,
            long: self.long,
            h0_white,
        }
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Bound(args) => {
            let model = args
                .model
                .as_deref()
                .map(CorrelationModelFile::load)
                .transpose()?;
            let outcome = commands::cmd_bound(&BoundRequest {
                receivers: args.receivers,
                smoothing: args.smoothing,
                oversampling: args.oversampling,
                rho_max: args.rho_max,
                model,
            })?;
            print!("{}", outcome.render());
            std::fs::create_dir_all(&args.out)?;
            let path = args.out.join("bound.json");
            commands::write_json(&path, &outcome.report)?;
            println!("wrote {}", path.display());
        }
        Command::Simulate(args) => {
            let file = commands::resolve_scenario(
                args.preset,
                args.scenario.as_deref(),
                &args.overrides(false),
            )?;
            let config = file.to_config()?;
            let outcome = commands::cmd_simulate(&config, &file.output_dir)?;
            for cell in &outcome.cells {
                let snr = cell
                    .snr_db
                    .map_or_else(|| "-".to_string(), |v| format!("{v} dB"));
                println!(
                    "{} snr={snr} N={} median={:.6} mean={:.6} sentinels={}",
                    cell.hypothesis,
                    cell.n,
                    cell.summary.median,
                    cell.summary.mean,
                    cell.summary.sentinels
                );
            }
            println!(
                "wrote {} files to {}",
                outcome.files.len(),
                file.output_dir.display()
            );
        }
        Command::WallSearch(args) => {
            let file = commands::resolve_scenario(
                args.scenario.preset,
                args.scenario.scenario.as_deref(),
                &args.scenario.overrides(args.h0_white),
            )?;
            let config = file.to_config()?;
            let grid = match &args.grid {
                Some(text) => commands::parse_grid(text)?,
                None => {
                    let mut g = file.snr_db.clone();
                    g.sort_by(|a, b| b.total_cmp(a));
                    g
                }
            };
            let result = commands::cmd_wall_search(&config, &grid, &file.output_dir)?;
            print!("{}", commands::render_wall_search(&result));
        }
    }
    Ok(())
}
