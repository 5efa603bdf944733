//! Command-line interface.

use std::path::PathBuf;

use aod_precoder::{OutputPairing, QuantizerSpec};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use crate::config::{ExperimentConfig, Scenario, SweepValue, SweepVar};
use crate::error::{ExperimentError, Result};
use crate::{output, runner};

/// Environment variable holding the log filter, e.g. `AODPREC_LOG=debug`.
pub const LOG_ENV: &str = "AODPREC_LOG";

#[derive(Debug, Parser)]
#[command(name = "aodprec", version, about = "Hybrid precoder design and Monte-Carlo sweeps for AoD estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decomposition error of random power-normalized targets.
    DecompSweep(RunArgs),
    /// Angle error bounds of digital and hybrid precoders.
    AebSweep(RunArgs),
    /// Quantization error bound against the measured error increase.
    QuantBound(RunArgs),
    /// One digital design and its factorization, dumped as JSON.
    Design(RunArgs),
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub sweep: Option<SweepVar>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<SweepValue>>,
    #[arg(long)]
    pub n_tx: Option<usize>,
    #[arg(long)]
    pub n_rf: Option<usize>,
    #[arg(long)]
    pub m_pilots: Option<usize>,
    #[arg(long)]
    pub p_dbm: Option<f64>,
    /// Phase-shifter bits, or `inf`.
    #[arg(long)]
    pub bits: Option<QuantizerSpec>,
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub aod_deg: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ue_angles: Option<Vec<f64>>,
    #[arg(long)]
    pub half_width_deg: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub i_max: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// `refit` or `listing`.
    #[arg(long, value_parser = parse_pairing)]
    pub pairing: Option<OutputPairing>,
    /// Archive per-iteration diagnostics in the trial JSON.
    #[arg(long)]
    pub diagnostics: bool,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_pairing(s: &str) -> std::result::Result<OutputPairing, String> {
    match s {
        "refit" => Ok(OutputPairing::Refit),
        "listing" => Ok(OutputPairing::Listing),
        _ => Err(format!("expected 'refit' or 'listing', got '{s}'")),
    }
}

impl RunArgs {
    /// File config (or defaults) with every given flag applied.
    pub fn resolve(&self, scenario: Scenario) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_toml_file(path)?,
            None => ExperimentConfig::default(),
        };
        if self.config.is_some() && cfg.scenario != scenario {
            warn!("config scenario '{}' replaced by '{}'", cfg.scenario.name(), scenario.name());
        }
        cfg.scenario = scenario;
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        apply!(
            values, n_tx, n_rf, m_pilots, p_dbm, bits, snr_db, beta, aod_deg, ue_angles, half_width_deg, trials, seed,
            i_max, k_max, pairing
        );
        if let Some(v) = self.sweep {
            cfg.sweep = Some(v);
        }
        cfg.diagnostics |= self.diagnostics;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let (args, scenario) = match &cli.command {
        Command::DecompSweep(a) => (a, Scenario::Decomp),
        Command::AebSweep(a) => (a, Scenario::Aeb),
        Command::QuantBound(a) => (a, Scenario::Quantbound),
        Command::Design(a) => (a, Scenario::Aeb),
    };
    let cfg = args.resolve(scenario)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .map_err(|e| ExperimentError::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        if let Command::Design(_) = cli.command {
            let dump = runner::run_design(&cfg)?;
            let path = output::write_design(&args.out, &dump)?;
            info!("wrote {}", path.display());
            return Ok(());
        }
        let out = runner::run(&cfg)?;
        for path in output::write_run(&args.out, cfg.scenario.name(), &out)? {
            info!("wrote {}", path.display());
        }
        if out.violations.is_empty() {
            Ok(())
        } else {
            for v in &out.violations {
                warn!("{v}");
            }
            Err(ExperimentError::Assertion(format!(
                "quantization bound violated in {} case(s)",
                out.violations.len()
            )))
        }
    })
}
