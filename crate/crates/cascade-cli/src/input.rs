//! Builds the field series a command runs on, either from a snapshot
//! manifest on disk or from a named generator.

use crate::config::RunConfig;
use cascade_scope::fields::generators::{
    abc_velocity, abc_vorticity, demo1d_field, random_multiscale, single_mode_vorticity,
    taylor_green_velocity, taylor_green_vorticity,
};
use cascade_scope::fields::{read_field, velocity_from_vorticity, Grid, VectorField};
use cascade_scope::{Error, Result, ScalarSeries, VectorSeries};
use clap::{Args, ValueEnum};
use serde::Deserialize;
use std::f64::consts::PI;
use std::path::Path;

/// Synthetic inputs for the series commands. All of them sample on a
/// periodic cube; `zero` is the degenerate baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Zero,
    Abc,
    TaylorGreen,
    SingleMode,
    Multiscale,
}

/// Flags shaping generated input. Ignored when `--in` names a manifest.
#[derive(Debug, Clone, Args)]
pub struct SeriesArgs {
    /// Generator used when no input manifest is given.
    #[arg(long, value_enum, default_value_t = GenKind::Abc)]
    pub gen: GenKind,

    /// Grid resolution per axis for generated input.
    #[arg(long, default_value_t = 32)]
    pub n: usize,

    /// Snapshot count for generated input.
    #[arg(long, default_value_t = 5)]
    pub snapshots: usize,

    /// Wavenumber of the single-mode generator.
    #[arg(long, default_value_t = 4)]
    pub k: usize,

    /// Generator amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub amp: f64,

    /// Lowest mode of the multiscale band.
    #[arg(long, default_value_t = 1)]
    pub kmin: usize,

    /// Highest mode of the multiscale band.
    #[arg(long, default_value_t = 6)]
    pub kmax: usize,

    /// Spectral slope of the multiscale band.
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub slope: f64,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    snapshots: Vec<ManifestRow>,
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    t: f64,
    omega: String,
    u: String,
}

/// Loads a (vorticity, velocity) series pair from a JSON manifest whose
/// field paths are taken relative to the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<(VectorSeries, VectorSeries)> {
    let text = std::fs::read_to_string(path)?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("manifest {}: {e}", path.display())))?;
    if manifest.snapshots.is_empty() {
        return Err(Error::Format(format!("manifest {} lists no snapshots", path.display())));
    }
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut omega = Vec::with_capacity(manifest.snapshots.len());
    let mut u = Vec::with_capacity(manifest.snapshots.len());
    for row in &manifest.snapshots {
        omega.push((row.t, read_field(dir.join(&row.omega))?.field.into_vector()?));
        u.push((row.t, read_field(dir.join(&row.u))?.field.into_vector()?));
    }
    Ok((VectorSeries::new(omega)?, VectorSeries::new(u)?))
}

fn cube(n: usize) -> Result<Grid> {
    Grid::new(3, &[n, n, n], &[-PI; 3], &[2.0 * PI; 3], &[true; 3])
}

/// The (vorticity, velocity) pair for a series command: the manifest named
/// by `--in` when present, otherwise the requested generator sampled at
/// uniformly spaced times over the horizon.
pub fn vector_pair(cfg: &RunConfig, args: &SeriesArgs) -> Result<(VectorSeries, VectorSeries)> {
    if let Some(input) = &cfg.input {
        return load_manifest(Path::new(input));
    }
    if args.snapshots < 2 {
        return Err(Error::InvalidParameter("generated series needs at least 2 snapshots".into()));
    }
    let grid = cube(args.n)?;
    let times: Vec<f64> = (0..args.snapshots)
        .map(|i| i as f64 * cfg.t_horizon / (args.snapshots - 1) as f64)
        .collect();
    let static_pair = |w: VectorField| -> Result<(VectorSeries, VectorSeries)> {
        let (u, _) = velocity_from_vorticity(&w)?;
        Ok((
            VectorSeries::time_constant(w, cfg.t_horizon, args.snapshots)?,
            VectorSeries::time_constant(u, cfg.t_horizon, args.snapshots)?,
        ))
    };
    match args.gen {
        GenKind::Zero => {
            let z = VectorField::zeros(grid);
            Ok((
                VectorSeries::time_constant(z.clone(), cfg.t_horizon, args.snapshots)?,
                VectorSeries::time_constant(z, cfg.t_horizon, args.snapshots)?,
            ))
        }
        GenKind::Abc => {
            let mut w = Vec::new();
            let mut u = Vec::new();
            for &t in &times {
                w.push((t, abc_vorticity(&grid, t, 1.0, 1.0, 1.0)?));
                u.push((t, abc_velocity(&grid, t, 1.0, 1.0, 1.0)?));
            }
            Ok((VectorSeries::new(w)?, VectorSeries::new(u)?))
        }
        GenKind::TaylorGreen => {
            let mut w = Vec::new();
            let mut u = Vec::new();
            for &t in &times {
                w.push((t, taylor_green_vorticity(&grid, t)?));
                u.push((t, taylor_green_velocity(&grid, t)?));
            }
            Ok((VectorSeries::new(w)?, VectorSeries::new(u)?))
        }
        GenKind::SingleMode => static_pair(single_mode_vorticity(&grid, args.amp, args.k)?),
        GenKind::Multiscale => {
            let mut w = Vec::new();
            let mut u = Vec::new();
            for &t in &times {
                let wt = random_multiscale(
                    &grid, args.kmin, args.kmax, args.slope, cfg.seed, args.amp, t,
                )?;
                let (ut, _) = velocity_from_vorticity(&wt)?;
                w.push((t, wt));
                u.push((t, ut));
            }
            Ok((VectorSeries::new(w)?, VectorSeries::new(u)?))
        }
    }
}

/// The demo density grid: 2^15 cells by default over [-35, 35], open ends.
pub fn demo_grid(points: usize) -> Result<Grid> {
    Grid::new(1, &[points], &[-35.0], &[70.0], &[false])
}

/// A time-constant scalar series for the sweep commands: the file named by
/// `--in` when present, otherwise the demo density.
pub fn scalar_series(cfg: &RunConfig, points: usize, snapshots: usize) -> Result<ScalarSeries> {
    let field = match &cfg.input {
        Some(input) => read_field(Path::new(input))?.field.into_scalar()?,
        None => demo1d_field(&demo_grid(points)?)?,
    };
    ScalarSeries::time_constant(field, cfg.t_horizon, snapshots)
}
