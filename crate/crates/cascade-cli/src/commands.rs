//! The seven subcommands. Each one resolves its inputs, runs the library,
//! and writes self-describing artifacts into the output directory.

use crate::config::{OutputKind, RunConfig};
use crate::render::{self, Series};
use cascade_scope::cascade::{
    assumption_report, balance_residual, flux_curve, locality_ratios, verify_cascade,
    vorticity_diagnostics, AssumptionReport, BalanceBreakdown, CascadeVerdict, LocalityTable,
    VorticityDiagnostics,
};
use cascade_scope::covers::uniform_cover;
use cascade_scope::cutoffs::{build_eta, build_psi, verify_eta_bounds, verify_psi_bounds, CutoffCheckReport};
use cascade_scope::ensemble::{
    detect_scales, integral_average, scale_sweep, DetectorReport, SweepResult,
};
use cascade_scope::fields::generators::demo1d_value;
use cascade_scope::fields::{gradient_norm, HasGrid, Scheme, MAX_DIM};
use cascade_scope::{validate_cover, CoverValidityReport, Error, Result, ScalarSeries, VectorSeries};
use serde::Serialize;
use std::path::PathBuf;

/// Reference global-average value the default demo run reproduces, and
/// the window it must land in.
pub const DEMO_MEAN: f64 = -0.003880;
pub const DEMO_MEAN_TOL: f64 = 2e-4;

/// Bias-spread threshold for the sweep's scale detector.
const DETECTOR_THRESHOLD: f64 = 0.1;

fn out_path(cfg: &RunConfig, name: &str) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.out_dir);
    std::fs::create_dir_all(&dir)?;
    Ok(dir.join(name))
}

fn config_json(cfg: &RunConfig) -> String {
    serde_json::to_string(cfg).expect("run config serializes")
}

fn emit(path: &PathBuf) {
    println!("wrote {}", path.display());
}

#[derive(Serialize)]
struct Convention {
    name: &'static str,
    value: f64,
}

#[derive(Serialize)]
struct AverageReport<'a> {
    config: &'a RunConfig,
    conventions: Vec<Convention>,
    target: f64,
    tolerance: f64,
    matched: Option<Convention>,
}

fn write_sweep_outputs(
    cfg: &RunConfig,
    sweep: &SweepResult,
    stem: &str,
    title: &str,
) -> Result<()> {
    let cj = config_json(cfg);
    if cfg.wants(OutputKind::Csv) {
        let rows: Vec<Vec<f64>> = sweep
            .scales
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                vec![
                    r,
                    sweep.values_min[i],
                    sweep.values_uniform[i],
                    sweep.values_max[i],
                    sweep.f0,
                ]
            })
            .collect();
        let path = out_path(cfg, &format!("{stem}.csv"))?;
        render::write_csv(&path, &cj, &["R", "min", "uniform", "max", "F0"], &rows)?;
        emit(&path);
    }
    if cfg.wants(OutputKind::Svg) {
        let f0_line = vec![sweep.f0; sweep.scales.len()];
        let series = [
            Series { name: "min bias", color: "#2166ac", xs: &sweep.scales, ys: &sweep.values_min },
            Series { name: "max bias", color: "#b2182b", xs: &sweep.scales, ys: &sweep.values_max },
            Series {
                name: "uniform",
                color: "#333333",
                xs: &sweep.scales,
                ys: &sweep.values_uniform,
            },
            Series { name: "F0", color: "#4daf4a", xs: &sweep.scales, ys: &f0_line },
        ];
        let path = out_path(cfg, &format!("{stem}.svg"))?;
        render::write_svg(&path, title, true, &series, &cj)?;
        emit(&path);
    }
    Ok(())
}

/// Demo figures: the 1D density curve, the biased-cover scale sweep, and
/// the global-average comparison across the reporting conventions.
pub fn demo1d(cfg: &RunConfig, series: &ScalarSeries) -> Result<()> {
    let cj = config_json(cfg);
    let m = 2001usize;
    let xs: Vec<f64> = (0..m).map(|i| -35.0 + 70.0 * i as f64 / (m - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| demo1d_value(x)).collect();
    if cfg.wants(OutputKind::Csv) {
        let rows: Vec<Vec<f64>> = xs.iter().zip(&ys).map(|(&x, &y)| vec![x, y]).collect();
        let path = out_path(cfg, "figure1.csv")?;
        render::write_csv(&path, &cj, &["x", "f"], &rows)?;
        emit(&path);
    }
    if cfg.wants(OutputKind::Svg) {
        let series = [Series { name: "f", color: "#2166ac", xs: &xs, ys: &ys }];
        let path = out_path(cfg, "figure1.svg")?;
        render::write_svg(&path, "demo density", false, &series, &cj)?;
        emit(&path);
    }

    let ens = cfg.ensemble();
    let sweep = scale_sweep(series, &cfg.scales, &ens, cfg.budget)?;
    write_sweep_outputs(cfg, &sweep, "sweep", "scale sweep, bias envelope")?;

    if cfg.wants(OutputKind::Json) {
        let avg = integral_average(series, &ens)?;
        let conventions =
            avg.conventions().into_iter().map(|(name, value)| Convention { name, value }).collect();
        let matched = avg
            .matched_convention(DEMO_MEAN, DEMO_MEAN_TOL)
            .map(|(name, value)| Convention { name, value });
        let report = AverageReport {
            config: cfg,
            conventions,
            target: DEMO_MEAN,
            tolerance: DEMO_MEAN_TOL,
            matched,
        };
        let path = out_path(cfg, "average.json")?;
        render::write_json(&path, &report)?;
        emit(&path);
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepReport<'a> {
    config: &'a RunConfig,
    f0: f64,
    scales: &'a [f64],
    values_min: &'a [f64],
    values_uniform: &'a [f64],
    values_max: &'a [f64],
    detector: DetectorReport,
}

/// Biased-cover sweep over an input density or the demo profile.
pub fn sweep(cfg: &RunConfig, series: &ScalarSeries) -> Result<()> {
    let ens = cfg.ensemble();
    let result = scale_sweep(series, &cfg.scales, &ens, cfg.budget)?;
    write_sweep_outputs(cfg, &result, "sweep", "scale sweep, bias envelope")?;
    if cfg.wants(OutputKind::Json) {
        let detector = detect_scales(&result, DETECTOR_THRESHOLD)?;
        let report = SweepReport {
            config: cfg,
            f0: result.f0,
            scales: &result.scales,
            values_min: &result.values_min,
            values_uniform: &result.values_uniform,
            values_max: &result.values_max,
            detector,
        };
        let path = out_path(cfg, "sweep.json")?;
        render::write_json(&path, &report)?;
        emit(&path);
    }
    Ok(())
}

/// The gradient threshold for the intense region: the flag value when
/// given, otherwise the median of |grad u| on the first snapshot under
/// the same derivative scheme the coherence check uses.
fn resolve_m(cfg: &RunConfig, u: &VectorSeries) -> Result<f64> {
    if let Some(m) = cfg.m {
        return Ok(m);
    }
    let grid = u.grid();
    let scheme = if (0..grid.dim()).all(|a| grid.periodic(a)) {
        Scheme::Spectral
    } else {
        Scheme::Central2
    };
    let g = gradient_norm(u.field(0), scheme)?;
    let mut vals = g.raw().to_vec();
    vals.sort_unstable_by(f64::total_cmp);
    Ok(vals[vals.len() / 2])
}

#[derive(Serialize)]
struct DiagnoseReport<'a> {
    config: &'a RunConfig,
    m_used: Option<f64>,
    sigma0_undefined: bool,
    diagnostics: VorticityDiagnostics,
    assumptions: Option<AssumptionReport>,
}

/// Vorticity diagnostics plus the three assumption checks. When P0
/// vanishes, sigma0 is undefined; the report flags that instead of
/// judging assumptions that need it.
pub fn diagnose(cfg: &RunConfig, omega: &VectorSeries, u: &VectorSeries) -> Result<()> {
    let diag = vorticity_diagnostics(omega, cfg.rho2, cfg.r0)?;
    let report = if diag.sigma0.is_none() {
        DiagnoseReport {
            config: cfg,
            m_used: None,
            sigma0_undefined: true,
            diagnostics: diag,
            assumptions: None,
        }
    } else {
        let m = resolve_m(cfg, u)?;
        let assumptions = assumption_report(omega, u, &diag, m, cfg.c1, cfg.beta, cfg.c2)?;
        DiagnoseReport {
            config: cfg,
            m_used: Some(m),
            sigma0_undefined: false,
            diagnostics: diag,
            assumptions: Some(assumptions),
        }
    };
    let path = out_path(cfg, "diagnose.json")?;
    render::write_json(&path, &report)?;
    emit(&path);
    Ok(())
}

#[derive(Serialize)]
struct CascadeReport<'a> {
    config: &'a RunConfig,
    m_used: Option<f64>,
    sigma0_undefined: bool,
    kstar: f64,
    diagnostics: VorticityDiagnostics,
    assumptions: Option<AssumptionReport>,
    verdict: Option<CascadeVerdict>,
    locality: LocalityTable,
}

/// Full pipeline: diagnostics, assumption checks, the flux curve over the
/// configured scales, the cascade verdict, and the locality table.
pub fn cascade(cfg: &RunConfig, omega: &VectorSeries, u: &VectorSeries) -> Result<()> {
    let ens = cfg.ensemble();
    let diag = vorticity_diagnostics(omega, cfg.rho2, cfg.r0)?;
    let flux = flux_curve(omega, u, &cfg.scales, &ens)?;
    let kstar = ens.kstar_analytic();
    let locality = locality_ratios(&flux, kstar)?;
    let (m_used, assumptions, verdict) = if diag.sigma0.is_none() {
        (None, None, None)
    } else {
        let m = resolve_m(cfg, u)?;
        let assumptions = assumption_report(omega, u, &diag, m, cfg.c1, cfg.beta, cfg.c2)?;
        let verdict = verify_cascade(&flux, &diag, kstar, cfg.beta)?;
        (Some(m), Some(assumptions), Some(verdict))
    };
    let cj = config_json(cfg);
    if cfg.wants(OutputKind::Csv) {
        let rows: Vec<Vec<f64>> = (0..flux.scales.len())
            .map(|i| vec![flux.scales[i], flux.phi[i], flux.psi[i], flux.covers[i] as f64])
            .collect();
        let path = out_path(cfg, "flux.csv")?;
        render::write_csv(&path, &cj, &["R", "phi", "psi", "elements"], &rows)?;
        emit(&path);
    }
    if cfg.wants(OutputKind::Svg) {
        let series = [Series { name: "phi", color: "#b2182b", xs: &flux.scales, ys: &flux.phi }];
        let path = out_path(cfg, "flux.svg")?;
        render::write_svg(&path, "normalized flux", true, &series, &cj)?;
        emit(&path);
    }
    if cfg.wants(OutputKind::Json) {
        let report = CascadeReport {
            config: cfg,
            m_used,
            sigma0_undefined: diag.sigma0.is_none(),
            kstar,
            diagnostics: diag,
            assumptions,
            verdict,
            locality,
        };
        let path = out_path(cfg, "cascade.json")?;
        render::write_json(&path, &report)?;
        emit(&path);
    }
    Ok(())
}

#[derive(Serialize)]
struct BalanceRow {
    r: f64,
    #[serde(flatten)]
    terms: BalanceBreakdown,
}

#[derive(Serialize)]
struct BalanceReport<'a> {
    config: &'a RunConfig,
    rows: &'a [BalanceRow],
}

/// Balance-identity residual table, one row per configured scale, always
/// evaluated at the end of the horizon.
pub fn balance(cfg: &RunConfig, omega: &VectorSeries, u: &VectorSeries) -> Result<()> {
    let rows: Vec<BalanceRow> = cfg
        .scales
        .iter()
        .map(|&r| {
            let terms = balance_residual(omega, u, [0.0; MAX_DIM], r, cfg.rho2, None)?;
            Ok(BalanceRow { r, terms })
        })
        .collect::<Result<_>>()?;
    let cj = config_json(cfg);
    if cfg.wants(OutputKind::Csv) {
        let table: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| {
                vec![
                    row.r,
                    row.terms.flux,
                    row.terms.final_enstrophy,
                    row.terms.palinstrophy,
                    row.terms.cutoff_transport,
                    row.terms.stretching,
                    row.terms.normalizer,
                    row.terms.residual,
                    row.terms.eval_time,
                ]
            })
            .collect();
        let header = [
            "R",
            "flux",
            "final_enstrophy",
            "palinstrophy",
            "cutoff_transport",
            "stretching",
            "normalizer",
            "residual",
            "eval_time",
        ];
        let path = out_path(cfg, "balance.csv")?;
        render::write_csv(&path, &cj, &header, &table)?;
        emit(&path);
    }
    if cfg.wants(OutputKind::Json) {
        let path = out_path(cfg, "balance.json")?;
        render::write_json(&path, &BalanceReport { config: cfg, rows: &rows })?;
        emit(&path);
    }
    Ok(())
}

#[derive(Serialize)]
struct CoverReport<'a> {
    config: &'a RunConfig,
    r: f64,
    n: usize,
    centers: Vec<Vec<f64>>,
    validity: CoverValidityReport,
    valid: bool,
}

/// Builds and validates the uniform lattice cover at one scale.
pub fn cover(cfg: &RunConfig, r: f64) -> Result<()> {
    let cover = uniform_cover(cfg.r0, r, cfg.dim, cfg.k1, cfg.k2)?;
    let validity = validate_cover(&cover);
    let report = CoverReport {
        config: cfg,
        r,
        n: cover.n(),
        centers: cover.centers().iter().map(|c| c[..cfg.dim].to_vec()).collect(),
        valid: validity.is_valid(),
        validity,
    };
    let path = out_path(cfg, "cover.json")?;
    render::write_json(&path, &report)?;
    emit(&path);
    Ok(())
}

#[derive(Serialize)]
struct CutoffReport<'a> {
    config: &'a RunConfig,
    r: f64,
    report: CutoffCheckReport,
}

/// Measures the temporal and spatial cutoff ratio constants by dense
/// sampling; `--budget` sets the sample count.
pub fn cutoff_verify(cfg: &RunConfig, r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("R = {r} must be positive")));
    }
    let eta = build_eta(cfg.t_horizon, cfg.rho1)?;
    let psi = build_psi([0.0; MAX_DIM], r, cfg.rho2, cfg.dim)?;
    let samples = cfg.budget.max(16);
    let e = verify_eta_bounds(&eta, samples);
    let p = verify_psi_bounds(&psi, samples);
    let report = CutoffCheckReport {
        measured_c0_eta: e.measured_c0_eta,
        measured_c0_grad: p.measured_c0_grad,
        measured_c0_lap: p.measured_c0_lap,
        c_alpha: None,
        delta_alpha: None,
        degenerate: false,
        bound_satisfied: None,
        samples,
    };
    let path = out_path(cfg, "cutoffs.json")?;
    render::write_json(&path, &CutoffReport { config: cfg, r, report })?;
    emit(&path);
    Ok(())
}
