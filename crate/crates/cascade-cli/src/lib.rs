//! Command-line front end: flags, config resolution, and dispatch.
//!
//! Every flag value is validated against the module preconditions before
//! any computation starts, and all numeric output is deterministic for a
//! fixed configuration and seed.

pub mod commands;
pub mod config;
pub mod input;
pub mod render;

use cascade_scope::fields::generators::demo1d_field;
use cascade_scope::{Error, Result, ScalarSeries};
use clap::{Parser, Subcommand};
use config::{CommandDefaults, ConfigPatch, OutputKind, RunConfig, ScalesDefault};
use input::SeriesArgs;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "cascade-scope",
    version,
    about = "Scale-localized averages, biased covers, and cascade diagnostics"
)]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Integral scale R0.
    #[arg(long = "R0", global = true)]
    pub r0: Option<f64>,

    /// Time horizon T.
    #[arg(long = "T", global = true)]
    pub t_horizon: Option<f64>,

    /// Cover size budget K1.
    #[arg(long = "K1", global = true)]
    pub k1: Option<usize>,

    /// Cover multiplicity budget K2.
    #[arg(long = "K2", global = true)]
    pub k2: Option<usize>,

    /// Temporal cutoff sharpness, in (1/2, 1).
    #[arg(long, global = true)]
    pub rho1: Option<f64>,

    /// Spatial cutoff sharpness, in (1/2, 1).
    #[arg(long, global = true)]
    pub rho2: Option<f64>,

    /// Ensemble density exponent, in (0, 1].
    #[arg(long, global = true)]
    pub delta: Option<f64>,

    /// Inertial-range margin, in (0, 1).
    #[arg(long, global = true)]
    pub beta: Option<f64>,

    /// Bound the measured coherence constant is judged against.
    #[arg(long = "C1", global = true)]
    pub c1: Option<f64>,

    /// Localization budget constant.
    #[arg(long = "C2", global = true)]
    pub c2: Option<f64>,

    /// Intense-region gradient threshold (default: median |grad u|).
    #[arg(long = "M", global = true)]
    pub m: Option<f64>,

    /// Scale list: lo:hi:Nlog, lo:hi:Nlin, or comma-separated values.
    #[arg(long, global = true)]
    pub scales: Option<String>,

    /// Seed for randomized generators.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Optimizer and sampling budget.
    #[arg(long, global = true)]
    pub budget: Option<usize>,

    /// Spatial dimension where no input data fixes it.
    #[arg(long, global = true)]
    pub dim: Option<usize>,

    /// Input file: a scalar field for sweep, a series manifest elsewhere.
    #[arg(long = "in", global = true)]
    pub input: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Restrict outputs to one artifact kind.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputKind>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Demo density figures and the global-average comparison.
    Demo1d {
        /// Demo grid resolution.
        #[arg(long, default_value_t = 32768)]
        points: usize,
        /// Snapshot count of the time-constant series.
        #[arg(long, default_value_t = 5)]
        snapshots: usize,
    },
    /// Biased-cover scale sweep over a density.
    Sweep {
        /// Demo grid resolution when no input file is given.
        #[arg(long, default_value_t = 32768)]
        points: usize,
        /// Snapshot count of the time-constant series.
        #[arg(long, default_value_t = 5)]
        snapshots: usize,
    },
    /// Vorticity diagnostics and the assumption checks.
    Diagnose {
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Flux curve, cascade verdict, and locality table.
    Cascade {
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Balance-identity residual table.
    Balance {
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Uniform cover construction and validation.
    Cover {
        /// Cover scale R.
        #[arg(long = "R", default_value_t = 1.0)]
        r: f64,
    },
    /// Cutoff ratio-bound measurements.
    CutoffVerify {
        /// Cutoff scale R.
        #[arg(long = "R", default_value_t = 1.0)]
        r: f64,
    },
}

impl Cli {
    fn flag_patch(&self) -> ConfigPatch {
        ConfigPatch {
            r0: self.r0,
            t_horizon: self.t_horizon,
            k1: self.k1,
            k2: self.k2,
            rho1: self.rho1,
            rho2: self.rho2,
            delta: self.delta,
            beta: self.beta,
            c1: self.c1,
            c2: self.c2,
            m: self.m,
            scales: self.scales.clone(),
            seed: self.seed,
            budget: self.budget,
            dim: self.dim,
            input: self.input.as_ref().map(|p| p.display().to_string()),
            out: self.out.as_ref().map(|p| p.display().to_string()),
            format: self.format,
        }
    }
}

/// Re-resolves the configuration when the input data's dimension differs
/// from the provisional one. An explicit --dim that contradicts the data
/// is an error rather than something to silently fix.
fn refit_dim(
    patch: &ConfigPatch,
    defaults: &CommandDefaults,
    cfg: RunConfig,
    data_dim: usize,
) -> Result<RunConfig> {
    if cfg.dim == data_dim {
        return Ok(cfg);
    }
    if patch.dim.is_some() {
        return Err(Error::InvalidParameter(format!(
            "--dim {} does not match the input dimension {}",
            cfg.dim, data_dim
        )));
    }
    config::resolve(patch, defaults, data_dim)
}

pub fn run(cli: Cli) -> Result<()> {
    let file_patch = match &cli.config {
        Some(path) => ConfigPatch::from_file(path)?,
        None => ConfigPatch::default(),
    };
    let patch = file_patch.overlay(cli.flag_patch());
    match &cli.command {
        Command::Demo1d { points, snapshots } => {
            let defaults = CommandDefaults { scales: ScalesDefault::Demo, budget: 64 };
            if patch.dim.is_some_and(|d| d != 1) {
                return Err(Error::InvalidParameter("demo1d is one-dimensional".into()));
            }
            let cfg = config::resolve(&patch, &defaults, 1)?;
            let field = demo1d_field(&input::demo_grid(*points)?)?;
            let series = ScalarSeries::time_constant(field, cfg.t_horizon, *snapshots)?;
            commands::demo1d(&cfg, &series)
        }
        Command::Sweep { points, snapshots } => {
            let defaults = CommandDefaults { scales: ScalesDefault::Demo, budget: 64 };
            let cfg = config::resolve(&patch, &defaults, patch.dim.unwrap_or(1))?;
            let series = input::scalar_series(&cfg, *points, *snapshots)?;
            let cfg = refit_dim(&patch, &defaults, cfg, series.grid().dim())?;
            commands::sweep(&cfg, &series)
        }
        Command::Diagnose { series } => {
            let defaults = CommandDefaults { scales: ScalesDefault::DyadicOfR0, budget: 64 };
            let cfg = config::resolve(&patch, &defaults, patch.dim.unwrap_or(3))?;
            let (omega, u) = input::vector_pair(&cfg, series)?;
            let cfg = refit_dim(&patch, &defaults, cfg, omega.grid().dim())?;
            commands::diagnose(&cfg, &omega, &u)
        }
        Command::Cascade { series } => {
            let defaults = CommandDefaults { scales: ScalesDefault::DyadicOfR0, budget: 64 };
            let cfg = config::resolve(&patch, &defaults, patch.dim.unwrap_or(3))?;
            let (omega, u) = input::vector_pair(&cfg, series)?;
            let cfg = refit_dim(&patch, &defaults, cfg, omega.grid().dim())?;
            commands::cascade(&cfg, &omega, &u)
        }
        Command::Balance { series } => {
            let defaults = CommandDefaults { scales: ScalesDefault::DyadicOfR0, budget: 64 };
            let cfg = config::resolve(&patch, &defaults, patch.dim.unwrap_or(3))?;
            let (omega, u) = input::vector_pair(&cfg, series)?;
            let cfg = refit_dim(&patch, &defaults, cfg, omega.grid().dim())?;
            commands::balance(&cfg, &omega, &u)
        }
        Command::Cover { r } => {
            let defaults = CommandDefaults { scales: ScalesDefault::TenthOfR0, budget: 64 };
            let cfg = config::resolve(&patch, &defaults, patch.dim.unwrap_or(1))?;
            commands::cover(&cfg, *r)
        }
        Command::CutoffVerify { r } => {
            let defaults = CommandDefaults { scales: ScalesDefault::TenthOfR0, budget: 8192 };
            let cfg = config::resolve(&patch, &defaults, patch.dim.unwrap_or(1))?;
            commands::cutoff_verify(&cfg, *r)
        }
    }
}
