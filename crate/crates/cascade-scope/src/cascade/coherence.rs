//! Coherence of the vorticity direction: the pointwise Hölder ratio of
//! direction misalignment to pair distance, its supremum over regions of
//! intense velocity gradient, and the hybrid magnitude-coherence integral.

use crate::error::{Error, Result};
use crate::fields::grid::MAX_DIM;
use crate::fields::{
    calculus, gradient_norm, Grid, HasGrid, ScalarField, VectorField, VectorSeries,
};
use crate::numeric::tree_sum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Magnitude floor below which the direction field is left undefined.
pub fn vorticity_floor(max_vorticity: f64) -> f64 {
    1e-8 * max_vorticity
}

/// Relative curl residual above which a velocity/vorticity pair is
/// rejected as inconsistent.
pub const CURL_CONSISTENCY_TOL: f64 = 0.05;

/// The pointwise coherence ratio field together with the mask of cells
/// where the direction was defined (vorticity magnitude at or above the
/// floor).
#[derive(Debug, Clone)]
pub struct CoherenceField {
    pub rho: ScalarField,
    pub defined: Vec<bool>,
    pub floor: f64,
}

/// Measured coherence over a pair set: the supremum of
/// |sin angle(xi(x), xi(y))| / |x-y|^gamma.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub gamma: f64,
    /// Pair radius when the pair set was distance-limited; None when every
    /// pair in the admissible region was considered.
    pub pair_radius: Option<f64>,
    /// Gradient threshold defining the intense region (0 when unused).
    pub m: f64,
    pub floor: f64,
    pub c1_measured: f64,
    pub pairs: u64,
}

/// A coherence report judged against a user bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoherenceVerdict {
    pub report: CoherenceReport,
    pub c1_user: f64,
    pub holds: bool,
}

fn unit_directions(omega: &VectorField, floor: f64) -> (Vec<[f64; 3]>, Vec<bool>) {
    let n = omega.grid().num_cells();
    let f2 = floor * floor;
    let mut xi = vec![[0.0; 3]; n];
    let mut defined = vec![false; n];
    for lin in 0..n {
        let v = omega.vector_at(lin);
        let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if n2 >= f2 && n2 > 0.0 {
            let inv = 1.0 / n2.sqrt();
            xi[lin] = [v[0] * inv, v[1] * inv, v[2] * inv];
            defined[lin] = true;
        }
    }
    (xi, defined)
}

fn sin_angle(a: [f64; 3], b: [f64; 3]) -> f64 {
    let c = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

/// Candidate cell indices of the axis-aligned box of half-width `r`
/// around the cell `x`, sorted ascending. The box covers every cell whose
/// center lies within `r`, whatever the alignment.
fn box_candidates(grid: &Grid, x: usize, r: f64, out: &mut Vec<usize>) {
    out.clear();
    let idx = grid.unlinear(x);
    let mut axis: [Vec<usize>; MAX_DIM] = [Vec::new(), Vec::new(), Vec::new()];
    for (a, list) in axis.iter_mut().enumerate() {
        if a >= grid.dim() {
            list.push(0);
            continue;
        }
        let n = grid.resolution(a) as i64;
        let k = (r / grid.spacing(a)).floor() as i64 + 1;
        if grid.periodic(a) {
            if 2 * k + 1 >= n {
                list.extend(0..n as usize);
            } else {
                let i = idx[a] as i64;
                list.extend((i - k..=i + k).map(|v| v.rem_euclid(n) as usize));
            }
        } else {
            let lo = (idx[a] as i64 - k).max(0);
            let hi = (idx[a] as i64 + k).min(n - 1);
            list.extend((lo..=hi).map(|v| v as usize));
        }
    }
    for &i0 in &axis[0] {
        for &i1 in &axis[1] {
            for &i2 in &axis[2] {
                out.push(grid.linear([i0, i1, i2]));
            }
        }
    }
    out.sort_unstable();
}

/// Coherence ratios at the cells `xs`, each a sup over the index-sorted
/// neighbor set within the pair radius.
fn rho_values(
    grid: &Grid,
    xi: &[[f64; 3]],
    defined: &[bool],
    gamma: f64,
    r: f64,
    xs: &[usize],
) -> Vec<f64> {
    let r2 = r * r;
    xs.par_iter()
        .map_init(Vec::new, |cand, &x| {
            if !defined[x] {
                return 0.0;
            }
            box_candidates(grid, x, r, cand);
            let cx = grid.cell_center(grid.unlinear(x));
            let mut best = 0.0_f64;
            for &y in cand.iter() {
                if y == x || !defined[y] {
                    continue;
                }
                let cy = grid.cell_center(grid.unlinear(y));
                let d2 = grid.min_image_dist2(cy, cx);
                if d2 > r2 {
                    continue;
                }
                best = best.max(sin_angle(xi[x], xi[y]) / d2.sqrt().powf(gamma));
            }
            best
        })
        .collect()
}

/// Pointwise coherence ratio of the vorticity direction over pairs within
/// distance `r`: zero where the sup is empty, zero and flagged where the
/// magnitude sits below `floor`.
pub fn coherence_measure(
    omega: &VectorField,
    gamma: f64,
    r: f64,
    floor: f64,
) -> Result<CoherenceField> {
    let grid = omega.grid();
    if omega.ncomp() != 3 {
        return Err(Error::InvalidParameter(
            "coherence needs a three-component vorticity field".into(),
        ));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Hölder exponent {gamma} must lie in (0, 1)"
        )));
    }
    if !(floor.is_finite() && floor > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "vorticity floor {floor} must be positive"
        )));
    }
    if r < grid.min_spacing() {
        return Err(Error::InvalidParameter(format!(
            "pair radius {r} is below the grid spacing {}",
            grid.min_spacing()
        )));
    }
    let (xi, defined) = unit_directions(omega, floor);
    let xs: Vec<usize> = (0..grid.num_cells()).collect();
    let vals = rho_values(grid, &xi, &defined, gamma, r, &xs);
    Ok(CoherenceField {
        rho: ScalarField::from_data(grid.clone(), vals)?,
        defined,
        floor,
    })
}

/// Largest relative L2 residual of curl(u) - omega over the snapshots.
/// Spectral derivatives on fully periodic grids, second-order central
/// differences otherwise.
pub fn curl_residual(u: &VectorSeries, omega: &VectorSeries) -> Result<f64> {
    super::check_same_sampling(omega, u)?;
    let scheme = super::derivative_scheme(omega.grid());
    let mut worst = 0.0_f64;
    for j in 0..omega.len() {
        let w = omega.field(j);
        let c = calculus::curl(u.field(j), scheme)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for comp in 0..3 {
            let wc = w.component(comp);
            let cc = c.component(comp);
            for (a, b) in cc.iter().zip(wc) {
                num += (a - b) * (a - b);
                den += b * b;
            }
        }
        worst = worst.max((num / den.max(f64::MIN_POSITIVE)).sqrt());
    }
    Ok(worst)
}

/// Supremum of the coherence ratio (gamma = 1/2) over pairs with an
/// intense-gradient first point: x restricted to the ball of radius 2 R0
/// with |grad u| above `m` in Frobenius norm, y to the ball of radius
/// 2 R0 + R0^(2/3), both above the vorticity floor. The pair count spans
/// all snapshots.
pub fn check_coherence(
    omega: &VectorSeries,
    u: &VectorSeries,
    m: f64,
    c1_user: f64,
    r0: f64,
) -> Result<CoherenceVerdict> {
    super::check_same_sampling(omega, u)?;
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidParameter(format!("R0 = {r0} must be positive")));
    }
    let residual = curl_residual(u, omega)?;
    if residual > CURL_CONSISTENCY_TOL {
        return Err(Error::InvalidParameter(format!(
            "vorticity is not the curl of the velocity: relative residual {residual:.3} exceeds {CURL_CONSISTENCY_TOL}"
        )));
    }
    let grid = omega.grid();
    let gamma = 0.5;
    let max_norm = (0..omega.len()).fold(0.0_f64, |acc, j| acc.max(omega.field(j).max_norm()));
    let floor = vorticity_floor(max_norm);

    let origin = [0.0; MAX_DIM];
    let x_r2 = (2.0 * r0) * (2.0 * r0);
    let ext = 2.0 * r0 + r0.powf(2.0 / 3.0);
    let y_r2 = ext * ext;
    let n = grid.num_cells();
    let centers: Vec<[f64; MAX_DIM]> = (0..n).map(|lin| grid.cell_center(grid.unlinear(lin))).collect();
    let in_x: Vec<bool> = centers.iter().map(|c| plain_dist2(c, &origin, grid.dim()) <= x_r2).collect();
    let in_y: Vec<bool> = centers.iter().map(|c| plain_dist2(c, &origin, grid.dim()) <= y_r2).collect();

    let scheme = super::derivative_scheme(grid);
    let mut c1_measured = 0.0_f64;
    let mut pairs = 0_u64;
    for j in 0..omega.len() {
        let (xi, defined) = unit_directions(omega.field(j), floor);
        let gnorm = gradient_norm(u.field(j), scheme)?;
        let gdata = gnorm.raw();
        let xs: Vec<usize> = (0..n)
            .filter(|&lin| in_x[lin] && defined[lin] && gdata[lin] > m)
            .collect();
        let ys: Vec<usize> = (0..n).filter(|&lin| in_y[lin] && defined[lin]).collect();
        if xs.is_empty() || ys.is_empty() {
            continue;
        }
        pairs += xs.len() as u64 * (ys.len() as u64 - 1);
        let sup = xs
            .par_iter()
            .map(|&x| {
                let cx = centers[x];
                let mut best = 0.0_f64;
                for &y in &ys {
                    if y == x {
                        continue;
                    }
                    let d2 = grid.min_image_dist2(centers[y], cx);
                    if d2 == 0.0 {
                        continue;
                    }
                    best = best.max(sin_angle(xi[x], xi[y]) / d2.sqrt().powf(gamma));
                }
                best
            })
            .reduce(|| 0.0, f64::max);
        c1_measured = c1_measured.max(sup);
    }
    let report = CoherenceReport {
        gamma,
        pair_radius: None,
        m,
        floor,
        c1_measured,
        pairs,
    };
    Ok(CoherenceVerdict { report, c1_user, holds: c1_measured <= c1_user })
}

fn plain_dist2(a: &[f64; MAX_DIM], b: &[f64; MAX_DIM], dim: usize) -> f64 {
    (0..dim).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum()
}

/// Space-time integral of |omega|^2 rho^2 (pair radius 2R, gamma = 1/2)
/// over the ball B(x0, 2R) and the trailing time window of length (2R)^2,
/// trapezoid in time with the cut interval linearly interpolated.
pub fn hybrid_integral(omega: &VectorSeries, x0: [f64; MAX_DIM], r: f64) -> Result<f64> {
    let grid = omega.grid();
    if omega.field(0).ncomp() != 3 {
        return Err(Error::InvalidParameter(
            "hybrid integral needs a three-component vorticity field".into(),
        ));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale {r} must be positive")));
    }
    let pair_radius = 2.0 * r;
    if pair_radius < grid.min_spacing() {
        return Err(Error::InvalidParameter(format!(
            "pair radius {pair_radius} is below the grid spacing {}",
            grid.min_spacing()
        )));
    }
    let max_norm = (0..omega.len()).fold(0.0_f64, |acc, j| acc.max(omega.field(j).max_norm()));
    if max_norm == 0.0 {
        return Ok(0.0);
    }
    let floor = vorticity_floor(max_norm);

    let mut xs = Vec::new();
    let ball2 = pair_radius * pair_radius;
    grid.for_each_window_cell(x0, pair_radius, |lin, offset| {
        let mut d2 = 0.0;
        for v in offset.iter().take(grid.dim()) {
            d2 += v * v;
        }
        if d2 <= ball2 {
            xs.push(lin);
        }
    });
    xs.sort_unstable();
    let vol = grid.cell_volume();

    let per_snapshot: Vec<f64> = (0..omega.len())
        .map(|j| {
            let snap = omega.field(j);
            let (xi, defined) = unit_directions(snap, floor);
            let rho = rho_values(grid, &xi, &defined, 0.5, pair_radius, &xs);
            let n2 = snap.norm2_field();
            let terms: Vec<f64> = xs
                .iter()
                .zip(&rho)
                .map(|(&lin, &p)| n2.raw()[lin] * p * p * vol)
                .collect();
            tree_sum(&terms)
        })
        .collect();

    let times = omega.times();
    let lo = (omega.duration() - pair_radius * pair_radius).max(0.0);
    let mut total = 0.0;
    for j in 0..times.len() - 1 {
        let (a, b) = (times[j], times[j + 1]);
        if b <= lo {
            continue;
        }
        let s = lo.max(a);
        let alpha = (s - a) / (b - a);
        let i_s = per_snapshot[j] + alpha * (per_snapshot[j + 1] - per_snapshot[j]);
        total += (b - s) * 0.5 * (i_s + per_snapshot[j + 1]);
    }
    Ok(total)
}
