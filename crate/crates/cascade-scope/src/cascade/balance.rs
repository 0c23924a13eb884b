//! Residual of the localized enstrophy balance: transport through the
//! cutoff against final-time enstrophy, palinstrophy, cutoff motion, and
//! vortex stretching.

use super::{check_same_sampling, derivative_scheme, jacobian_norm2};
use crate::cutoffs::{build_eta, build_psi};
use crate::error::{Error, Result};
use crate::fields::grid::MAX_DIM;
use crate::fields::{calculus, HasGrid, VectorSeries};
use crate::numeric::tree_sum;
use serde::{Deserialize, Serialize};

/// The five terms of the localized balance at one ball, their largest
/// magnitude, and the relative residual
/// flux - (final + palinstrophy - transport - stretching).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BalanceBreakdown {
    pub flux: f64,
    pub final_enstrophy: f64,
    pub palinstrophy: f64,
    pub cutoff_transport: f64,
    pub stretching: f64,
    pub normalizer: f64,
    /// Residual over the largest term magnitude; 0 when every term is 0.
    pub residual: f64,
    pub eval_time: f64,
}

/// Evaluates the balance identity on the ball at `center`, scale `r`, up
/// to `eval_time` (default: the full horizon). The evaluation time must be
/// a snapshot time in the final third of the horizon, where the temporal
/// cutoff has already saturated and the boundary term carries the spatial
/// cutoff alone.
pub fn balance_residual(
    omega: &VectorSeries,
    u: &VectorSeries,
    center: [f64; MAX_DIM],
    r: f64,
    rho: f64,
    eval_time: Option<f64>,
) -> Result<BalanceBreakdown> {
    check_same_sampling(omega, u)?;
    if omega.field(0).ncomp() != 3 || u.field(0).ncomp() != 3 {
        return Err(Error::InvalidParameter(
            "balance needs three-component vorticity and velocity".into(),
        ));
    }
    let grid = omega.grid();
    let t_total = omega.duration();
    let t_eval = eval_time.unwrap_or(t_total);
    let tol = 1e-9 * t_total;
    let j_eval = omega
        .times()
        .iter()
        .position(|&t| (t - t_eval).abs() <= tol)
        .ok_or_else(|| {
            Error::InvalidParameter(format!("evaluation time {t_eval} is not a snapshot time"))
        })?;
    if t_eval < 2.0 * t_total / 3.0 - tol {
        return Err(Error::InvalidParameter(format!(
            "evaluation time {t_eval} sits before the saturated window [{}, {t_total}]",
            2.0 * t_total / 3.0
        )));
    }
    let psi = build_psi(center, r, rho, grid.dim())?;
    let eta = build_eta(t_total, rho)?;
    grid.check_support(center, psi.support_radius())?;
    let scheme = derivative_scheme(grid);
    let vol = grid.cell_volume();
    let dim = grid.dim();

    struct Cell {
        lin: usize,
        psi: f64,
        lap: f64,
        grad: [f64; MAX_DIM],
    }
    let mut window: Vec<Cell> = Vec::new();
    grid.for_each_window_cell(center, psi.support_radius(), |lin, offset| {
        let mut d2 = 0.0;
        for v in offset.iter().take(dim) {
            d2 += v * v;
        }
        let d = d2.sqrt();
        let w = psi.psi_at_dist(d);
        let lap = psi.laplacian_at_dist(d);
        let slope = psi.radial_derivative_at_dist(d);
        if w == 0.0 && lap == 0.0 && slope == 0.0 {
            return;
        }
        let mut grad = [0.0; MAX_DIM];
        if d > 0.0 && slope != 0.0 {
            for (a, v) in offset.iter().enumerate().take(dim) {
                grad[a] = slope * v / d;
            }
        }
        window.push(Cell { lin, psi: w, lap, grad });
    });

    let dt = omega.dt();
    let weight = |j: usize| -> f64 {
        if j == 0 || j == j_eval {
            0.5 * dt
        } else {
            dt
        }
    };

    let mut flux = 0.0;
    let mut palinstrophy = 0.0;
    let mut cutoff_transport = 0.0;
    let mut stretching = 0.0;
    let mut final_enstrophy = 0.0;
    for j in 0..=j_eval {
        let w_field = omega.field(j);
        let vel = u.field(j);
        let n2 = w_field.norm2_field();
        let g2 = jacobian_norm2(w_field, scheme)?;
        let jac_u = calculus::jacobian(vel, scheme)?;

        let mut flux_terms = Vec::with_capacity(window.len());
        let mut palin_terms = Vec::with_capacity(window.len());
        let mut half_terms = Vec::with_capacity(window.len());
        let mut lap_terms = Vec::with_capacity(window.len());
        let mut stretch_terms = Vec::with_capacity(window.len());
        for cell in &window {
            let lin = cell.lin;
            let half = 0.5 * n2.raw()[lin] * vol;
            let uv = vel.vector_at(lin);
            let dot: f64 = (0..dim).map(|a| uv[a] * cell.grad[a]).sum();
            flux_terms.push(half * dot);
            palin_terms.push(g2.raw()[lin] * cell.psi * vol);
            half_terms.push(half * cell.psi);
            lap_terms.push(half * cell.lap);
            let wv = w_field.vector_at(lin);
            let mut s = 0.0;
            for c in 0..3 {
                for a in 0..dim {
                    s += wv[a] * jac_u.component(c * dim + a)[lin] * wv[c];
                }
            }
            stretch_terms.push(s * cell.psi * vol);
        }
        let t = omega.times()[j];
        let (e, ep, w_j) = (eta.eta(t), eta.eta_prime(t), weight(j));
        flux += w_j * e * tree_sum(&flux_terms);
        palinstrophy += w_j * e * tree_sum(&palin_terms);
        cutoff_transport += w_j * (ep * tree_sum(&half_terms) + e * tree_sum(&lap_terms));
        stretching += w_j * e * tree_sum(&stretch_terms);
        if j == j_eval {
            final_enstrophy = tree_sum(&half_terms);
        }
    }

    let raw = flux - (final_enstrophy + palinstrophy - cutoff_transport - stretching);
    let normalizer = flux
        .abs()
        .max(final_enstrophy.abs())
        .max(palinstrophy.abs())
        .max(cutoff_transport.abs())
        .max(stretching.abs());
    let residual = if normalizer > 0.0 { raw / normalizer } else { 0.0 };
    Ok(BalanceBreakdown {
        flux,
        final_enstrophy,
        palinstrophy,
        cutoff_transport,
        stretching,
        normalizer,
        residual,
        eval_time: t_eval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::generators::{taylor_green_velocity, taylor_green_vorticity};
    use crate::fields::{FieldSeries, Grid, VectorField};
    use std::f64::consts::PI;

    fn cube(n: usize) -> Grid {
        Grid::new(3, &[n, n, n], &[-PI; 3], &[2.0 * PI; 3], &[true; 3]).unwrap()
    }

    fn tg_series(grid: &Grid, t_total: f64, count: usize) -> (VectorSeries, VectorSeries) {
        let times: Vec<f64> =
            (0..count).map(|j| t_total * j as f64 / (count - 1) as f64).collect();
        let w = FieldSeries::new(
            times.iter().map(|&t| (t, taylor_green_vorticity(grid, t).unwrap())).collect(),
        )
        .unwrap();
        let u = FieldSeries::new(
            times.iter().map(|&t| (t, taylor_green_velocity(grid, t).unwrap())).collect(),
        )
        .unwrap();
        (w, u)
    }

    #[test]
    fn zero_history_balances_exactly() {
        let grid = cube(8);
        let zero = |_: f64| VectorField::zeros(grid.clone());
        let times = [0.0, 0.5, 1.0];
        let w = FieldSeries::new(times.iter().map(|&t| (t, zero(t))).collect()).unwrap();
        let u = FieldSeries::new(times.iter().map(|&t| (t, zero(t))).collect()).unwrap();
        let b = balance_residual(&w, &u, [0.0; MAX_DIM], 0.5, 0.75, None).unwrap();
        assert_eq!(b.residual, 0.0);
        assert_eq!(b.normalizer, 0.0);
    }

    #[test]
    fn planar_flow_has_no_stretching() {
        let grid = cube(16);
        let (w, u) = tg_series(&grid, 0.5, 5);
        let b = balance_residual(&w, &u, [0.3, 0.1, -0.2], 0.8, 0.75, None).unwrap();
        assert!(b.stretching.abs() <= 1e-10 * b.normalizer, "stretching = {}", b.stretching);
        assert!(b.normalizer > 0.0);
    }

    #[test]
    fn evaluation_time_must_be_a_late_snapshot() {
        let grid = cube(8);
        let (w, u) = tg_series(&grid, 1.0, 5);
        assert!(balance_residual(&w, &u, [0.0; MAX_DIM], 0.5, 0.75, Some(0.5)).is_err());
        assert!(balance_residual(&w, &u, [0.0; MAX_DIM], 0.5, 0.75, Some(0.9)).is_err());
        let b = balance_residual(&w, &u, [0.0; MAX_DIM], 0.5, 0.75, Some(0.75)).unwrap();
        assert_eq!(b.eval_time, 0.75);
    }

    #[test]
    fn residual_shrinks_with_time_resolution() {
        let grid = cube(16);
        let (w1, u1) = tg_series(&grid, 0.5, 5);
        let (w2, u2) = tg_series(&grid, 0.5, 17);
        let r1 = balance_residual(&w1, &u1, [0.0; MAX_DIM], 0.9, 0.75, None).unwrap();
        let r2 = balance_residual(&w2, &u2, [0.0; MAX_DIM], 0.9, 0.75, None).unwrap();
        assert!(
            r2.residual.abs() < r1.residual.abs(),
            "residuals {} vs {}",
            r1.residual,
            r2.residual
        );
    }
}
