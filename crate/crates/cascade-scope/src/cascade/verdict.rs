//! Cascade and locality verdicts: per-scale comparability of the averaged
//! flux with the palinstrophy, and cross-scale ratio bands.

use super::diagnostics::VorticityDiagnostics;
use super::flux::FluxCurve;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One scale judged against the comparability bounds
/// P0/(4K*) <= phi <= 4K* P0.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScaleCheck {
    pub scale: f64,
    pub phi: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
    /// Log-space distance to the nearer bound; ln(4K*) at phi = P0,
    /// negative outside the bounds, -inf when phi <= 0.
    pub margin: f64,
}

/// The cascade verdict over the inertial range [sigma0/beta, R0].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeVerdict {
    pub range_lo: f64,
    pub range_hi: f64,
    pub range_empty: bool,
    pub kstar: f64,
    pub beta: f64,
    pub p0: f64,
    pub scales_checked: usize,
    pub per_scale: Vec<ScaleCheck>,
    pub verified: bool,
    pub worst_margin: Option<f64>,
    /// Scale realizing the worst margin; the witness when the verdict
    /// fails.
    pub worst_scale: Option<f64>,
}

/// One ordered scale pair judged against the locality band
/// (r/R)^3 / (16 K*^2) <= psi_r/psi_R <= (r/R)^3 · 16 K*^2.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LocalityRow {
    pub r: f64,
    pub big_r: f64,
    /// psi_r / psi_R; None when the denominator vanishes.
    pub ratio: Option<f64>,
    pub band_lo: f64,
    pub band_hi: f64,
    pub inside: Option<bool>,
    /// k with r/R = 2^k, when the pair is dyadic to 1e-12 relative.
    pub dyadic_k: Option<i32>,
    /// Relative difference between psi_r/psi_R and (r/R)^3 phi_r/phi_R;
    /// pure floating-point noise since psi = r^3 phi by construction.
    pub identity_residual: Option<f64>,
    pub degenerate: bool,
}

/// Locality rows for every ordered pair r <= R of curve scales.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalityTable {
    pub kstar: f64,
    pub rows: Vec<LocalityRow>,
}

fn log_margin(phi: f64, lower: f64, upper: f64) -> f64 {
    if phi <= 0.0 {
        return f64::NEG_INFINITY;
    }
    (phi / lower).ln().min((upper / phi).ln())
}

/// Judges the flux curve against P0-comparability on the inertial range.
/// An empty range and a curve that never samples the range are both
/// reported in the verdict, not raised as errors.
pub fn verify_cascade(
    flux: &FluxCurve,
    diag: &VorticityDiagnostics,
    kstar: f64,
    beta: f64,
) -> Result<CascadeVerdict> {
    if !(kstar >= 1.0 && kstar.is_finite()) {
        return Err(Error::InvalidParameter(format!("K* = {kstar} must be at least 1")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta {beta} must lie in (0, 1)")));
    }
    let sigma0 = diag.sigma0.ok_or_else(|| {
        Error::InvalidParameter("sigma0 is undefined (P0 = 0), the cascade verdict needs it".into())
    })?;
    let range_lo = sigma0 / beta;
    let range_hi = diag.r0;
    let range_empty = range_lo > range_hi;
    let mut verdict = CascadeVerdict {
        range_lo,
        range_hi,
        range_empty,
        kstar,
        beta,
        p0: diag.p0,
        scales_checked: 0,
        per_scale: Vec::new(),
        verified: false,
        worst_margin: None,
        worst_scale: None,
    };
    if range_empty {
        return Ok(verdict);
    }
    let lower = diag.p0 / (4.0 * kstar);
    let upper = 4.0 * kstar * diag.p0;
    for (i, &r) in flux.scales.iter().enumerate() {
        if r < range_lo * (1.0 - 1e-12) || r > range_hi * (1.0 + 1e-12) {
            continue;
        }
        let phi = flux.phi[i];
        let margin = log_margin(phi, lower, upper);
        verdict.per_scale.push(ScaleCheck {
            scale: r,
            phi,
            lower,
            upper,
            holds: phi >= lower && phi <= upper,
            margin,
        });
    }
    verdict.scales_checked = verdict.per_scale.len();
    for check in &verdict.per_scale {
        if verdict.worst_margin.map_or(true, |m| check.margin < m) {
            verdict.worst_margin = Some(check.margin);
            verdict.worst_scale = Some(check.scale);
        }
    }
    verdict.verified =
        verdict.scales_checked > 0 && verdict.per_scale.iter().all(|c| c.holds);
    Ok(verdict)
}

/// Cross-scale flux ratios for every ordered pair of curve scales with
/// r <= R, judged against the 16 K*^2 locality bands.
pub fn locality_ratios(flux: &FluxCurve, kstar: f64) -> Result<LocalityTable> {
    if !(kstar >= 1.0 && kstar.is_finite()) {
        return Err(Error::InvalidParameter(format!("K* = {kstar} must be at least 1")));
    }
    let width = 16.0 * kstar * kstar;
    let mut rows = Vec::new();
    for (i, &r) in flux.scales.iter().enumerate() {
        for (j, &big_r) in flux.scales.iter().enumerate() {
            if r > big_r {
                continue;
            }
            let q3 = (r / big_r).powi(3);
            let (band_lo, band_hi) = (q3 / width, q3 * width);
            let ratio = if flux.psi[j] != 0.0 { Some(flux.psi[i] / flux.psi[j]) } else { None };
            let inside = ratio.map(|q| q >= band_lo && q <= band_hi);
            let identity_residual = ratio.and_then(|q| {
                if flux.phi[j] != 0.0 && q != 0.0 {
                    Some((q - q3 * (flux.phi[i] / flux.phi[j])).abs() / q.abs())
                } else {
                    None
                }
            });
            let k = (r / big_r).log2().round();
            let dyadic_k = if (r / big_r - (k).exp2()).abs() <= 1e-12 * (r / big_r) {
                Some(k as i32)
            } else {
                None
            };
            rows.push(LocalityRow {
                r,
                big_r,
                ratio,
                band_lo,
                band_hi,
                inside,
                dyadic_k,
                identity_residual,
                degenerate: ratio.is_none(),
            });
        }
    }
    Ok(LocalityTable { kstar, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag(sigma0: Option<f64>, p0: f64, r0: f64) -> VorticityDiagnostics {
        VorticityDiagnostics {
            e0: p0 * sigma0.map_or(0.0, |s| s * s),
            p0,
            p0_gradient: p0,
            p0_final: 0.0,
            sigma0,
            b_t: 1.0,
            r0,
            rho: 0.75,
        }
    }

    fn curve(scales: &[f64], phi: &[f64]) -> FluxCurve {
        FluxCurve {
            scales: scales.to_vec(),
            phi: phi.to_vec(),
            psi: scales.iter().zip(phi).map(|(&r, &p)| r * r * r * p).collect(),
            covers: vec![1; scales.len()],
        }
    }

    #[test]
    fn constant_curve_at_p0_verifies_with_the_maximal_margin() {
        let p0 = 2.5;
        let c = curve(&[0.2, 0.4, 0.8], &[p0; 3]);
        let v = verify_cascade(&c, &diag(Some(0.02), p0, 1.0), 216.0, 0.1).unwrap();
        assert!(v.verified);
        assert_eq!(v.scales_checked, 3);
        assert_relative_eq!(v.worst_margin.unwrap(), (4.0 * 216.0_f64).ln(), max_relative = 1e-12);
    }

    #[test]
    fn zero_flux_at_one_scale_fails_with_that_scale_named() {
        let p0 = 1.0;
        let c = curve(&[0.2, 0.4, 0.8], &[p0, 0.0, p0]);
        let v = verify_cascade(&c, &diag(Some(0.02), p0, 1.0), 216.0, 0.1).unwrap();
        assert!(!v.verified);
        assert_eq!(v.worst_scale, Some(0.4));
        assert_eq!(v.worst_margin, Some(f64::NEG_INFINITY));
        assert!(v.per_scale.iter().any(|s| s.scale == 0.4 && !s.holds));
    }

    #[test]
    fn inverted_range_is_reported_not_raised() {
        let c = curve(&[0.5], &[1.0]);
        let v = verify_cascade(&c, &diag(Some(0.8), 1.0, 1.0), 216.0, 0.1).unwrap();
        assert!(v.range_empty);
        assert!(!v.verified);
        assert_eq!(v.scales_checked, 0);
    }

    #[test]
    fn undefined_sigma0_is_an_error() {
        let c = curve(&[0.5], &[1.0]);
        assert!(verify_cascade(&c, &diag(None, 0.0, 1.0), 216.0, 0.1).is_err());
    }

    #[test]
    fn constant_phi_ratios_sit_on_the_band_center() {
        let c = curve(&[0.25, 0.5, 1.0], &[3.0; 3]);
        let table = locality_ratios(&c, 216.0).unwrap();
        for row in &table.rows {
            let q = row.ratio.unwrap();
            if row.r == row.big_r {
                assert_eq!(q, 1.0);
                assert_eq!(row.dyadic_k, Some(0));
            }
            assert!(row.inside.unwrap());
            assert!(row.identity_residual.unwrap() <= 1e-14);
        }
        let halves: Vec<i32> =
            table.rows.iter().filter(|r| r.r < r.big_r).filter_map(|r| r.dyadic_k).collect();
        assert_eq!(halves, vec![-1, -2, -1]);
    }

    #[test]
    fn zero_denominator_is_flagged_degenerate() {
        let c = curve(&[0.5, 1.0], &[1.0, 0.0]);
        let table = locality_ratios(&c, 216.0).unwrap();
        let row = table.rows.iter().find(|r| r.r == 0.5 && r.big_r == 1.0).unwrap();
        assert!(row.degenerate);
        assert!(row.ratio.is_none());
        assert!(row.inside.is_none());
    }
}
