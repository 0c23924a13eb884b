//! Vorticity diagnostics built on the ensemble machinery: direction
//! coherence, the dissipation-scale check, localized enstrophy fluxes,
//! the per-ball balance identity, and the cascade/locality verdicts.

pub mod balance;
pub mod coherence;
pub mod diagnostics;
pub mod flux;
pub mod verdict;

pub use balance::{balance_residual, BalanceBreakdown};
pub use coherence::{
    check_coherence, coherence_measure, curl_residual, hybrid_integral, vorticity_floor,
    CoherenceField, CoherenceReport, CoherenceVerdict,
};
pub use diagnostics::{
    assumption_report, check_localization, check_scale_domination, vorticity_diagnostics,
    AssumptionReport, LocalizationVerdict, ScaleDomination, VorticityDiagnostics,
};
pub use flux::{ensemble_flux, flux_curve, local_flux, FluxCurve, FluxPoint};
pub use verdict::{
    locality_ratios, verify_cascade, CascadeVerdict, LocalityRow, LocalityTable, ScaleCheck,
};

use crate::error::Result;
use crate::fields::{calculus, Grid, HasGrid, ScalarField, Scheme, VectorField, VectorSeries};

/// Spectral derivatives on fully periodic grids, second-order central
/// differences otherwise.
fn derivative_scheme(grid: &Grid) -> Scheme {
    if (0..grid.dim()).all(|a| grid.periodic(a)) {
        Scheme::Spectral
    } else {
        Scheme::Central2
    }
}

/// Pointwise squared Frobenius norm of the Jacobian of `v`.
fn jacobian_norm2(v: &VectorField, scheme: Scheme) -> Result<ScalarField> {
    let jac = calculus::jacobian(v, scheme)?;
    let grid = v.grid().clone();
    let mut out = vec![0.0; grid.num_cells()];
    for c in 0..jac.ncomp() {
        let comp = jac.component(c);
        for (o, d) in out.iter_mut().zip(comp) {
            *o += d * d;
        }
    }
    ScalarField::from_data(grid, out)
}

/// Errors unless the two series share a grid and snapshot times.
fn check_same_sampling(omega: &VectorSeries, u: &VectorSeries) -> Result<()> {
    use crate::error::Error;
    if !omega.grid().same_geometry(u.grid()) {
        return Err(Error::GridMismatch(
            "vorticity and velocity live on different grids".into(),
        ));
    }
    if omega.len() != u.len() {
        return Err(Error::GridMismatch(format!(
            "snapshot counts differ: {} vs {}",
            omega.len(),
            u.len()
        )));
    }
    let tol = 1e-9 * omega.duration().max(1e-300);
    for (a, b) in omega.times().iter().zip(u.times()) {
        if (a - b).abs() > tol {
            return Err(Error::GridMismatch(format!(
                "snapshot times differ: {a} vs {b}"
            )));
        }
    }
    Ok(())
}
