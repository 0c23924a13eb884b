//! Fourier-space differentiation and inversion on periodic grids.
//!
//! All operations here require every active axis to be periodic with even
//! resolution. Odd-order derivatives zero the Nyquist mode; the Laplacian and
//! its inverse treat it with its real squared wavenumber.

use crate::error::{Error, Result};
use crate::fields::field::{HasGrid, ScalarField, VectorField};
use crate::fields::grid::{Grid, MAX_DIM};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Whether every active axis is periodic with even resolution.
pub(crate) fn supports_spectral(grid: &Grid) -> bool {
    (0..grid.dim()).all(|a| grid.periodic(a) && grid.resolution(a) % 2 == 0)
}

fn check_spectral_grid(grid: &Grid) -> Result<()> {
    for a in 0..grid.dim() {
        if !grid.periodic(a) {
            return Err(Error::InvalidParameter(format!(
                "spectral scheme needs periodic axis {a}"
            )));
        }
        if grid.resolution(a) % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "spectral scheme needs even resolution on axis {a}"
            )));
        }
    }
    Ok(())
}

/// Signed integer frequency of index `j` on an axis of length `n`.
/// Nyquist (j = n/2) maps to n/2; callers decide how to weight it.
fn freq(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// In-place complex FFT along one axis of row-major data.
fn fft_axis(grid: &Grid, data: &mut [Complex<f64>], axis: usize, inverse: bool) {
    let n = grid.resolution(axis);
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let res = [grid.resolution(0), grid.resolution(1), grid.resolution(2)];
    let stride = match axis {
        0 => res[1] * res[2],
        1 => res[2],
        _ => 1,
    };
    let mut line = vec![Complex::default(); n];
    // iterate over all lines along `axis`
    let outer: [usize; 2] = match axis {
        0 => [res[1], res[2]],
        1 => [res[0], res[2]],
        _ => [res[0], res[1]],
    };
    for p in 0..outer[0] {
        for q in 0..outer[1] {
            let base = match axis {
                0 => p * res[2] + q,
                1 => p * res[1] * res[2] + q,
                _ => p * res[1] * res[2] + q * res[2],
            };
            for (i, v) in line.iter_mut().enumerate() {
                *v = data[base + i * stride];
            }
            fft.process(&mut line);
            for (i, v) in line.iter().enumerate() {
                data[base + i * stride] = *v;
            }
        }
    }
    if inverse {
        let scale = 1.0 / n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

pub(crate) fn forward(grid: &Grid, real: &[f64]) -> Vec<Complex<f64>> {
    let mut data: Vec<Complex<f64>> = real.iter().map(|&v| Complex::new(v, 0.0)).collect();
    for a in 0..grid.dim() {
        fft_axis(grid, &mut data, a, false);
    }
    data
}

pub(crate) fn inverse_real(grid: &Grid, mut data: Vec<Complex<f64>>) -> Vec<f64> {
    for a in 0..grid.dim() {
        fft_axis(grid, &mut data, a, true);
    }
    data.into_iter().map(|c| c.re).collect()
}

/// Physical wavenumber for mode index `j` on `axis`; 0 at Nyquist when
/// `odd_op` (first derivatives), the true magnitude otherwise.
pub(crate) fn wavenumber(grid: &Grid, axis: usize, j: usize, odd_op: bool) -> f64 {
    let n = grid.resolution(axis);
    if odd_op && j == n / 2 {
        return 0.0;
    }
    2.0 * PI * freq(j, n) as f64 / grid.extent(axis)
}

/// d/dx_axis of a scalar field, exact for band-limited data.
pub fn derivative_axis(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    let grid = f.grid().clone();
    check_spectral_grid(&grid)?;
    if axis >= grid.dim() {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
    }
    let mut hat = forward(&grid, f.data());
    for lin in 0..grid.num_cells() {
        let idx = grid.unlinear(lin);
        let k = wavenumber(&grid, axis, idx[axis], true);
        hat[lin] *= Complex::new(0.0, k);
    }
    ScalarField::from_data(grid.clone(), inverse_real(&grid, hat))
}

/// Componentwise spectral Laplacian of a scalar field.
pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    let grid = f.grid().clone();
    check_spectral_grid(&grid)?;
    let mut hat = forward(&grid, f.data());
    for lin in 0..grid.num_cells() {
        let idx = grid.unlinear(lin);
        let mut k2 = 0.0;
        for a in 0..grid.dim() {
            let k = wavenumber(&grid, a, idx[a], false);
            k2 += k * k;
        }
        hat[lin] *= -k2;
    }
    ScalarField::from_data(grid.clone(), inverse_real(&grid, hat))
}

/// Velocity with div u = 0 and curl u = omega, from Delta u = -curl omega.
/// The mean (mode-0) vorticity has no preimage and is projected out; it is
/// returned alongside the velocity so callers can report it.
pub fn velocity_from_vorticity(omega: &VectorField) -> Result<(VectorField, [f64; 3])> {
    let grid = omega.grid().clone();
    if grid.dim() < 2 || omega.ncomp() != 3 {
        return Err(Error::InvalidParameter(
            "velocity_from_vorticity needs a three-component field on a 2D or 3D grid".into(),
        ));
    }
    check_spectral_grid(&grid)?;
    let n = grid.num_cells();
    let hats: Vec<Vec<Complex<f64>>> =
        (0..3).map(|c| forward(&grid, omega.component(c))).collect();
    let mean = [hats[0][0].re / n as f64, hats[1][0].re / n as f64, hats[2][0].re / n as f64];

    let mut u_hat = vec![vec![Complex::default(); n]; 3];
    for lin in 0..n {
        let idx = grid.unlinear(lin);
        let mut k = [0.0_f64; MAX_DIM];
        let mut k2 = 0.0;
        let mut nyquist = false;
        for a in 0..grid.dim() {
            if idx[a] == grid.resolution(a) / 2 {
                nyquist = true;
            }
            k[a] = wavenumber(&grid, a, idx[a], true);
            k2 += k[a] * k[a];
        }
        if k2 == 0.0 || nyquist {
            continue;
        }
        let w = [hats[0][lin], hats[1][lin], hats[2][lin]];
        // u_hat = i k x w_hat / |k|^2
        let cross = [
            k[1] * w[2] - k[2] * w[1],
            k[2] * w[0] - k[0] * w[2],
            k[0] * w[1] - k[1] * w[0],
        ];
        for c in 0..3 {
            u_hat[c][lin] = Complex::new(0.0, 1.0) * cross[c] / k2;
        }
    }
    let comps: Result<Vec<ScalarField>> = u_hat
        .into_iter()
        .map(|h| ScalarField::from_data(grid.clone(), inverse_real(&grid, h)))
        .collect();
    Ok((VectorField::from_components(comps?)?, mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1d(n: usize) -> Grid {
        Grid::new(1, &[n], &[0.0], &[2.0 * PI], &[true]).unwrap()
    }

    #[test]
    fn derivative_of_sine_is_cosine_to_machine_precision() {
        let g = grid1d(32);
        let f = ScalarField::sample(g.clone(), |x| (3.0 * x[0]).sin()).unwrap();
        let d = derivative_axis(&f, 0).unwrap();
        for lin in 0..g.num_cells() {
            let x = g.cell_center(g.unlinear(lin))[0];
            assert!((d.get(lin) - 3.0 * (3.0 * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_of_mode_scales_by_k_squared() {
        let g = grid1d(64);
        let f = ScalarField::sample(g.clone(), |x| (5.0 * x[0]).cos()).unwrap();
        let l = laplacian(&f).unwrap();
        for lin in 0..g.num_cells() {
            assert!((l.get(lin) + 25.0 * f.get(lin)).abs() < 1e-11);
        }
    }

    #[test]
    fn spectral_ops_reject_odd_or_nonperiodic_grids() {
        let g = Grid::new(1, &[31], &[0.0], &[1.0], &[true]).unwrap();
        let f = ScalarField::zeros(g);
        assert!(derivative_axis(&f, 0).is_err());
        let g = Grid::new(1, &[32], &[0.0], &[1.0], &[false]).unwrap();
        let f = ScalarField::zeros(g);
        assert!(derivative_axis(&f, 0).is_err());
    }

    #[test]
    fn single_mode_vorticity_inverts_to_expected_velocity() {
        // omega = (0, 0, A sin(k x)): the divergence-free mean-zero inverse
        // is u = (0, -(A/k) cos(k x), 0), since d/dx of u_y recovers omega_z.
        let g = Grid::new(3, &[32, 8, 8], &[0.0; 3], &[2.0 * PI; 3], &[true; 3]).unwrap();
        let k = 4.0;
        let a = 2.5;
        let omega =
            VectorField::sample(g.clone(), |x| [0.0, 0.0, a * (k * x[0]).sin()]).unwrap();
        let (u, mean) = velocity_from_vorticity(&omega).unwrap();
        assert!(mean.iter().all(|m| m.abs() < 1e-12));
        for lin in 0..g.num_cells() {
            let x = g.cell_center(g.unlinear(lin));
            let expect = -(a / k) * (k * x[0]).cos();
            let v = u.vector_at(lin);
            assert!(v[0].abs() < 1e-12);
            assert!((v[1] - expect).abs() < 1e-12);
            assert!(v[2].abs() < 1e-12);
        }
    }

    #[test]
    fn mean_vorticity_is_projected_out_and_reported() {
        let g = Grid::new(3, &[8, 8, 8], &[0.0; 3], &[2.0 * PI; 3], &[true; 3]).unwrap();
        let omega = VectorField::sample(g.clone(), |x| [1.5, 0.0, (x[0]).sin()]).unwrap();
        let (_, mean) = velocity_from_vorticity(&omega).unwrap();
        assert!((mean[0] - 1.5).abs() < 1e-12);
    }
}
