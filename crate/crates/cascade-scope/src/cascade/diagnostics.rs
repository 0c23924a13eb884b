//! Enstrophy-level diagnostics at the integral scale: E0, the modified
//! palinstrophy P0, the dissipation scale sigma0 = sqrt(E0/P0), and the
//! three assumption checks a cascade verdict rests on.

use super::{check_same_sampling, derivative_scheme, jacobian_norm2};
use crate::cutoffs::{build_eta, build_psi};
use crate::error::{Error, Result};
use crate::fields::grid::MAX_DIM;
use crate::fields::{HasGrid, VectorSeries};
use crate::numeric::tree_sum;
use serde::{Deserialize, Serialize};

/// Integral-scale enstrophy budget of a vorticity history. The scale
/// normalization is cubic regardless of the grid dimension, matching the
/// three-dimensional definitions the diagnostics come from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VorticityDiagnostics {
    /// Time-averaged cutoff-weighted enstrophy per unit volume.
    pub e0: f64,
    /// Modified palinstrophy: gradient term plus the final-time enstrophy.
    pub p0: f64,
    /// Gradient part of `p0` alone.
    pub p0_gradient: f64,
    /// Final-time enstrophy part of `p0` alone.
    pub p0_final: f64,
    /// Dissipation scale sqrt(E0/P0); None when P0 = 0.
    pub sigma0: Option<f64>,
    /// Largest L1 norm of the vorticity over the snapshots.
    pub b_t: f64,
    pub r0: f64,
    pub rho: f64,
}

/// Whether the dissipation scale sits below the integral scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleDomination {
    pub sigma0: f64,
    pub beta: f64,
    pub r0: f64,
    /// beta R0 - sigma0; positive iff the check holds.
    pub margin: f64,
    pub holds: bool,
}

/// Enstrophy localization around the origin: the budget inequality on the
/// enlarged ball and the final-time modulation of the weighted enstrophy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationVerdict {
    /// Space-time enstrophy integral over the ball of radius 2R0 + R0^(2/3).
    pub integral: f64,
    /// 1/C2, the bound the integral must stay under.
    pub budget: f64,
    pub c2: f64,
    pub localization_holds: bool,
    /// Final-time weighted enstrophy over its running supremum; None when
    /// the supremum vanishes.
    pub modulation_ratio: Option<f64>,
    pub modulation_holds: bool,
    /// True when the weighted enstrophy vanishes at every snapshot; the
    /// modulation check then holds vacuously.
    pub degenerate: bool,
    /// True when R0 exceeds min(sqrt(T), 1), outside the stated regime.
    pub r0_warning: bool,
}

/// The three assumption checks bundled.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub coherence: super::CoherenceVerdict,
    pub scale: ScaleDomination,
    pub localization: LocalizationVerdict,
    pub all_hold: bool,
}

/// E0, P0, sigma0, and B_T of a vorticity history, cutoff at the origin
/// with scale `r0` and sharpness `rho`.
pub fn vorticity_diagnostics(omega: &VectorSeries, rho: f64, r0: f64) -> Result<VorticityDiagnostics> {
    if !(rho > 0.5 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("rho {rho} must lie in (1/2, 1)")));
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidParameter(format!("R0 = {r0} must be positive")));
    }
    if omega.field(0).ncomp() != 3 {
        return Err(Error::InvalidParameter(
            "diagnostics need a three-component vorticity field".into(),
        ));
    }
    let grid = omega.grid();
    let origin = [0.0; MAX_DIM];
    let psi = build_psi(origin, r0, rho, grid.dim())?;
    let eta = build_eta(omega.duration(), rho)?;
    grid.check_support(origin, psi.support_radius())?;
    let scheme = derivative_scheme(grid);
    let vol = grid.cell_volume();
    let expo = 2.0 * rho - 1.0;

    let mut window: Vec<(usize, f64, f64)> = Vec::new();
    grid.for_each_window_cell(origin, psi.support_radius(), |lin, offset| {
        let mut d2 = 0.0;
        for v in offset.iter().take(grid.dim()) {
            d2 += v * v;
        }
        let w = psi.psi_at_dist(d2.sqrt());
        if w > 0.0 {
            window.push((lin, w, w.powf(expo)));
        }
    });

    let mut e_terms = Vec::with_capacity(omega.len());
    let mut g_terms = Vec::with_capacity(omega.len());
    let mut b_t = 0.0_f64;
    let mut final_term = 0.0;
    for j in 0..omega.len() {
        let snap = omega.field(j);
        let n2 = snap.norm2_field();
        let g2 = jacobian_norm2(snap, scheme)?;
        let e: Vec<f64> = window.iter().map(|&(lin, _, wp)| 0.5 * n2.raw()[lin] * wp * vol).collect();
        let g: Vec<f64> = window.iter().map(|&(lin, w, _)| g2.raw()[lin] * w * vol).collect();
        let t = omega.times()[j];
        e_terms.push(tree_sum(&e) * eta.eta(t).powf(expo));
        g_terms.push(tree_sum(&g) * eta.eta(t));
        let l1: Vec<f64> = n2.raw().iter().map(|&v| v.sqrt() * vol).collect();
        b_t = b_t.max(tree_sum(&l1));
        if j == omega.len() - 1 {
            let f: Vec<f64> = window.iter().map(|&(lin, w, _)| 0.5 * n2.raw()[lin] * w * vol).collect();
            final_term = tree_sum(&f) / omega.duration();
        }
    }
    let r03 = r0 * r0 * r0;
    let e0 = omega.time_average(&e_terms) / r03;
    let p0_gradient = omega.time_average(&g_terms) / r03;
    let p0_final = final_term / r03;
    let p0 = p0_gradient + p0_final;
    let sigma0 = if p0 > 0.0 { Some((e0 / p0).sqrt()) } else { None };
    Ok(VorticityDiagnostics { e0, p0, p0_gradient, p0_final, sigma0, b_t, r0, rho })
}

/// Checks sigma0 < beta R0.
pub fn check_scale_domination(diag: &VorticityDiagnostics, beta: f64) -> Result<ScaleDomination> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta {beta} must lie in (0, 1)")));
    }
    let sigma0 = diag.sigma0.ok_or_else(|| {
        Error::InvalidParameter("sigma0 is undefined (P0 = 0), the scale check needs it".into())
    })?;
    let margin = beta * diag.r0 - sigma0;
    Ok(ScaleDomination { sigma0, beta, r0: diag.r0, margin, holds: sigma0 < beta * diag.r0 })
}

/// Checks the enstrophy budget on the enlarged ball and the final-time
/// modulation of the weighted enstrophy. Cells outside the grid contribute
/// nothing, so a ball spilling over a non-periodic boundary only shrinks
/// the integral.
pub fn check_localization(omega: &VectorSeries, r0: f64, rho: f64, c2: f64) -> Result<LocalizationVerdict> {
    if !(c2 > 0.0 && c2.is_finite()) {
        return Err(Error::InvalidParameter(format!("C2 = {c2} must be positive")));
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidParameter(format!("R0 = {r0} must be positive")));
    }
    let grid = omega.grid();
    let psi = build_psi([0.0; MAX_DIM], r0, rho, grid.dim())?;
    let ext = 2.0 * r0 + r0.powf(2.0 / 3.0);
    let ext2 = ext * ext;
    let origin = [0.0; MAX_DIM];
    let vol = grid.cell_volume();
    let ball: Vec<usize> = (0..grid.num_cells())
        .filter(|&lin| grid.min_image_dist2(grid.cell_center(grid.unlinear(lin)), origin) <= ext2)
        .collect();

    let mut ball_terms = Vec::with_capacity(omega.len());
    let mut weighted = Vec::with_capacity(omega.len());
    for j in 0..omega.len() {
        let n2 = omega.field(j).norm2_field();
        let b: Vec<f64> = ball.iter().map(|&lin| n2.raw()[lin] * vol).collect();
        ball_terms.push(tree_sum(&b));
        let w: Vec<f64> = n2
            .raw()
            .iter()
            .enumerate()
            .map(|(lin, &v)| {
                let d2 = grid.min_image_dist2(grid.cell_center(grid.unlinear(lin)), origin);
                v * psi.psi_at_dist(d2.sqrt()) * vol
            })
            .collect();
        weighted.push(tree_sum(&w));
    }
    let integral = omega.time_average(&ball_terms) * omega.duration();
    let budget = 1.0 / c2;
    let sup = weighted.iter().fold(0.0_f64, |a, &b| a.max(b));
    let last = *weighted.last().unwrap();
    let degenerate = sup == 0.0;
    let modulation_ratio = if degenerate { None } else { Some(last / sup) };
    let modulation_holds = modulation_ratio.map_or(true, |r| r >= 0.5);
    Ok(LocalizationVerdict {
        integral,
        budget,
        c2,
        localization_holds: integral <= budget,
        modulation_ratio,
        modulation_holds,
        degenerate,
        r0_warning: r0 > omega.duration().sqrt().min(1.0),
    })
}

/// Runs the coherence, scale-domination, and localization checks with one
/// shared diagnostics record.
pub fn assumption_report(
    omega: &VectorSeries,
    u: &VectorSeries,
    diag: &VorticityDiagnostics,
    m: f64,
    c1_user: f64,
    beta: f64,
    c2: f64,
) -> Result<AssumptionReport> {
    check_same_sampling(omega, u)?;
    let coherence = super::check_coherence(omega, u, m, c1_user, diag.r0)?;
    let scale = check_scale_domination(diag, beta)?;
    let localization = check_localization(omega, diag.r0, diag.rho, c2)?;
    let all_hold = coherence.holds
        && scale.holds
        && localization.localization_holds
        && localization.modulation_holds;
    Ok(AssumptionReport { coherence, scale, localization, all_hold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::generators::single_mode_vorticity;
    use crate::fields::{FieldSeries, Grid, ScalarField, VectorField};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn cube(n: usize) -> Grid {
        Grid::new(3, &[n, n, n], &[-PI; 3], &[2.0 * PI; 3], &[true; 3]).unwrap()
    }

    fn scaled(v: &VectorField, lambda: f64) -> VectorField {
        let comps = (0..v.ncomp())
            .map(|c| {
                ScalarField::from_data(
                    v.grid().clone(),
                    v.component(c).iter().map(|&x| lambda * x).collect(),
                )
                .unwrap()
            })
            .collect();
        VectorField::from_components(comps).unwrap()
    }

    fn static_series(field: VectorField, t: f64) -> VectorSeries {
        FieldSeries::time_constant(field, t, 5).unwrap()
    }

    #[test]
    fn sigma0_is_invariant_under_amplitude_scaling() {
        let grid = cube(16);
        let base = single_mode_vorticity(&grid, 1.0, 3).unwrap();
        let d1 = vorticity_diagnostics(&static_series(base.clone(), 1.0), 0.75, 2.0).unwrap();
        let d2 = vorticity_diagnostics(&static_series(scaled(&base, 7.3), 1.0), 0.75, 2.0).unwrap();
        let (s1, s2) = (d1.sigma0.unwrap(), d2.sigma0.unwrap());
        assert_relative_eq!(s1, s2, max_relative = 1e-12);
        assert_relative_eq!(d2.e0, 7.3 * 7.3 * d1.e0, max_relative = 1e-12);
    }

    #[test]
    fn single_mode_ratio_reduces_to_the_time_factor_identity() {
        let grid = cube(32);
        let k = 4;
        let rho = 0.75;
        let series = static_series(single_mode_vorticity(&grid, 1.0, k).unwrap(), 1.0);
        let r0 = 6.0;
        let diag = vorticity_diagnostics(&series, rho, r0).unwrap();

        let eta = build_eta(1.0, rho).unwrap();
        let expo = 2.0 * rho - 1.0;
        let e_t: Vec<f64> = series.times().iter().map(|&t| eta.eta(t).powf(expo)).collect();
        let g_t: Vec<f64> = series.times().iter().map(|&t| eta.eta(t)).collect();
        let time_ratio = series.time_average(&e_t) / series.time_average(&g_t);
        let expected = 0.5 * time_ratio / (k as f64 * k as f64);
        assert_relative_eq!(diag.e0 / diag.p0_gradient, expected, max_relative = 1e-10);

        let s = diag.sigma0.unwrap();
        assert!(s >= 0.5 / k as f64 && s <= 2.0 / k as f64, "sigma0 = {s}");
    }

    #[test]
    fn zero_field_reports_undefined_sigma0() {
        let grid = cube(8);
        let series = static_series(VectorField::zeros(grid), 1.0);
        let diag = vorticity_diagnostics(&series, 0.75, 2.0).unwrap();
        assert_eq!(diag.e0, 0.0);
        assert_eq!(diag.p0, 0.0);
        assert!(diag.sigma0.is_none());
        assert!(check_scale_domination(&diag, 0.1).is_err());
    }

    #[test]
    fn scale_domination_margins_match_the_definition() {
        let mk = |sigma0: f64| VorticityDiagnostics {
            e0: sigma0 * sigma0,
            p0: 1.0,
            p0_gradient: 1.0,
            p0_final: 0.0,
            sigma0: Some(sigma0),
            b_t: 1.0,
            r0: 1.0,
            rho: 0.75,
        };
        let ok = check_scale_domination(&mk(0.01), 0.1).unwrap();
        assert!(ok.holds);
        assert_relative_eq!(ok.margin, 0.09, max_relative = 1e-12);
        let bad = check_scale_domination(&mk(1.0), 0.5).unwrap();
        assert!(!bad.holds);
        assert!(bad.margin < 0.0);
    }

    #[test]
    fn growing_enstrophy_passes_modulation_and_a_spike_fails_it() {
        let grid = cube(8);
        let base = single_mode_vorticity(&grid, 1.0, 2).unwrap();
        let t_total = 1.0;
        let ramp: Vec<(f64, VectorField)> = (0..3)
            .map(|j| {
                let t = t_total * j as f64 / 2.0;
                (t, scaled(&base, t / t_total))
            })
            .collect();
        let ramp = FieldSeries::new(ramp).unwrap();
        let v = check_localization(&ramp, 0.5, 0.75, 1.0).unwrap();
        assert_relative_eq!(v.modulation_ratio.unwrap(), 1.0, max_relative = 1e-12);
        assert!(v.modulation_holds);

        let amps = [0.2, 1.0, 0.1_f64.sqrt()];
        let spike: Vec<(f64, VectorField)> = amps
            .iter()
            .enumerate()
            .map(|(j, &a)| (t_total * j as f64 / 2.0, scaled(&base, a)))
            .collect();
        let spike = FieldSeries::new(spike).unwrap();
        let v = check_localization(&spike, 0.5, 0.75, 1.0).unwrap();
        assert_relative_eq!(v.modulation_ratio.unwrap(), 0.1, max_relative = 1e-12);
        assert!(!v.modulation_holds);
    }

    #[test]
    fn zero_field_localization_is_degenerate_but_vacuously_modulated() {
        let grid = cube(8);
        let series = static_series(VectorField::zeros(grid), 1.0);
        let v = check_localization(&series, 0.5, 0.75, 1.0).unwrap();
        assert!(v.degenerate);
        assert!(v.modulation_ratio.is_none());
        assert!(v.modulation_holds);
        assert_eq!(v.integral, 0.0);
        assert!(v.localization_holds);
    }

    #[test]
    fn r0_outside_the_stated_regime_is_flagged() {
        let grid = cube(8);
        let base = single_mode_vorticity(&grid, 1.0, 2).unwrap();
        let short = FieldSeries::time_constant(base.clone(), 0.25, 3).unwrap();
        assert!(check_localization(&short, 0.8, 0.75, 1.0).unwrap().r0_warning);
        let long = FieldSeries::time_constant(base, 4.0, 3).unwrap();
        assert!(!check_localization(&long, 0.8, 0.75, 1.0).unwrap().r0_warning);
    }
}
