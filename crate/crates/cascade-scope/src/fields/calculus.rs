//! Discrete differential operators over gridded fields.
//!
//! Two interchangeable schemes: `Spectral` (exact on band-limited periodic
//! data) and `Central2` (second-order stencils, one-sided at non-periodic
//! edges), selected per call so generators and diagnostics can share code.

use crate::error::{Error, Result};
use crate::fields::field::{HasGrid, ScalarField, VectorField};
use crate::fields::spectral;

/// Differentiation backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Fourier differentiation; needs periodic axes with even resolution.
    Spectral,
    /// Second-order central differences, one-sided at open boundaries.
    Central2,
}

fn shift_index(n: usize, i: i64, periodic: bool) -> Option<usize> {
    if periodic {
        Some(i.rem_euclid(n as i64) as usize)
    } else if i < 0 || i >= n as i64 {
        None
    } else {
        Some(i as usize)
    }
}

/// First derivative along `axis` with second-order central differences.
fn central2_axis(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    let grid = f.grid().clone();
    let n = grid.resolution(axis);
    let h = grid.spacing(axis);
    let periodic = grid.periodic(axis);
    let mut out = vec![0.0; grid.num_cells()];
    let at = |idx: [usize; 3]| f.get(grid.linear(idx));
    for lin in 0..grid.num_cells() {
        let idx = grid.unlinear(lin);
        let i = idx[axis] as i64;
        let sample = |o: i64| {
            shift_index(n, i + o, periodic).map(|j| {
                let mut id = idx;
                id[axis] = j;
                at(id)
            })
        };
        out[lin] = match (sample(-1), sample(1)) {
            (Some(a), Some(b)) => (b - a) / (2.0 * h),
            (None, Some(_)) => {
                let f0 = sample(0).unwrap();
                (-3.0 * f0 + 4.0 * sample(1).unwrap() - sample(2).unwrap()) / (2.0 * h)
            }
            (Some(_), None) => {
                let f0 = sample(0).unwrap();
                (3.0 * f0 - 4.0 * sample(-1).unwrap() + sample(-2).unwrap()) / (2.0 * h)
            }
            (None, None) => unreachable!("resolution >= 4 per axis"),
        };
    }
    ScalarField::from_data(grid, out)
}

/// Second derivative along `axis` with second-order stencils.
fn central2_second_axis(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    let grid = f.grid().clone();
    let n = grid.resolution(axis);
    let h = grid.spacing(axis);
    let h2 = h * h;
    let periodic = grid.periodic(axis);
    let mut out = vec![0.0; grid.num_cells()];
    let at = |idx: [usize; 3]| f.get(grid.linear(idx));
    for lin in 0..grid.num_cells() {
        let idx = grid.unlinear(lin);
        let i = idx[axis] as i64;
        let sample = |o: i64| {
            shift_index(n, i + o, periodic).map(|j| {
                let mut id = idx;
                id[axis] = j;
                at(id)
            })
        };
        let f0 = sample(0).unwrap();
        out[lin] = match (sample(-1), sample(1)) {
            (Some(a), Some(b)) => (b - 2.0 * f0 + a) / h2,
            (None, Some(_)) => {
                (2.0 * f0 - 5.0 * sample(1).unwrap() + 4.0 * sample(2).unwrap()
                    - sample(3).unwrap())
                    / h2
            }
            (Some(_), None) => {
                (2.0 * f0 - 5.0 * sample(-1).unwrap() + 4.0 * sample(-2).unwrap()
                    - sample(-3).unwrap())
                    / h2
            }
            (None, None) => unreachable!("resolution >= 4 per axis"),
        };
    }
    ScalarField::from_data(grid, out)
}

/// First derivative of a scalar along one axis.
pub fn derivative_axis(f: &ScalarField, axis: usize, scheme: Scheme) -> Result<ScalarField> {
    if axis >= f.grid().dim() {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
    }
    match scheme {
        Scheme::Spectral => spectral::derivative_axis(f, axis),
        Scheme::Central2 => central2_axis(f, axis),
    }
}

/// Gradient of a scalar as a vector field with `dim` components.
pub fn gradient(f: &ScalarField, scheme: Scheme) -> Result<VectorField> {
    let comps: Result<Vec<ScalarField>> =
        (0..f.grid().dim()).map(|a| derivative_axis(f, a, scheme)).collect();
    VectorField::from_components(comps?)
}

/// Divergence of a vector field (one component per grid axis).
pub fn divergence(v: &VectorField, scheme: Scheme) -> Result<ScalarField> {
    let grid = v.grid().clone();
    if v.ncomp() != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "divergence needs {} components, got {}",
            grid.dim(),
            v.ncomp()
        )));
    }
    let mut out = ScalarField::zeros(grid.clone());
    for a in 0..grid.dim() {
        let d = derivative_axis(&v.component_field(a), a, scheme)?;
        for (o, s) in out.data_mut().iter_mut().zip(d.data()) {
            *o += s;
        }
    }
    Ok(out)
}

/// Curl of a three-component field. On a 2D grid the field is treated as
/// independent of the third coordinate, so those derivatives vanish.
pub fn curl(v: &VectorField, scheme: Scheme) -> Result<VectorField> {
    let grid = v.grid().clone();
    if grid.dim() < 2 || v.ncomp() != 3 {
        return Err(Error::InvalidParameter(
            "curl needs a three-component field on a 2D or 3D grid".into(),
        ));
    }
    let d = |c: usize, a: usize| -> Result<ScalarField> {
        if a >= grid.dim() {
            return Ok(ScalarField::zeros(grid.clone()));
        }
        derivative_axis(&v.component_field(c), a, scheme)
    };
    let mut comps = Vec::with_capacity(3);
    let pairs = [(2, 1, 1, 2), (0, 2, 2, 0), (1, 0, 0, 1)];
    for (c1, a1, c2, a2) in pairs {
        let p = d(c1, a1)?;
        let q = d(c2, a2)?;
        let data: Vec<f64> = p.data().iter().zip(q.data()).map(|(x, y)| x - y).collect();
        comps.push(ScalarField::from_data(grid.clone(), data)?);
    }
    VectorField::from_components(comps)
}

/// Laplacian of a scalar field.
pub fn laplacian(f: &ScalarField, scheme: Scheme) -> Result<ScalarField> {
    match scheme {
        Scheme::Spectral => spectral::laplacian(f),
        Scheme::Central2 => {
            let grid = f.grid().clone();
            let mut out = ScalarField::zeros(grid.clone());
            for a in 0..grid.dim() {
                let d2 = central2_second_axis(f, a)?;
                for (o, s) in out.data_mut().iter_mut().zip(d2.data()) {
                    *o += s;
                }
            }
            Ok(out)
        }
    }
}

/// Componentwise Laplacian of a vector field.
pub fn laplacian_vector(v: &VectorField, scheme: Scheme) -> Result<VectorField> {
    let comps: Result<Vec<ScalarField>> =
        (0..v.ncomp()).map(|c| laplacian(&v.component_field(c), scheme)).collect();
    VectorField::from_components(comps?)
}

/// All partial derivatives d v_c / d x_a, as a field with ncomp*dim
/// components laid out c*dim + a.
pub fn jacobian(v: &VectorField, scheme: Scheme) -> Result<VectorField> {
    let mut comps = Vec::with_capacity(v.ncomp() * v.grid().dim());
    for c in 0..v.ncomp() {
        let fc = v.component_field(c);
        for a in 0..v.grid().dim() {
            comps.push(derivative_axis(&fc, a, scheme)?);
        }
    }
    VectorField::from_components(comps)
}

/// Pointwise Frobenius norm of the Jacobian of `v`.
pub fn gradient_norm(v: &VectorField, scheme: Scheme) -> Result<ScalarField> {
    let jac = jacobian(v, scheme)?;
    let grid = v.grid().clone();
    let mut out = vec![0.0; grid.num_cells()];
    for (lin, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for c in 0..jac.ncomp() {
            let d = jac.component(c)[lin];
            s += d * d;
        }
        *o = s.sqrt();
    }
    ScalarField::from_data(grid, out)
}
