//! Scalar and vector fields on a [`Grid`].
//!
//! Vector data is stored component-major: component `c` of cell `lin` lives at
//! `data[c * num_cells + lin]`.

use crate::error::{Error, Result};
use crate::fields::grid::{Grid, MAX_DIM};
use crate::numeric::ensure_finite;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    ncomp: usize,
    data: Vec<f64>,
}

pub trait HasGrid {
    fn grid(&self) -> &Grid;
    /// Number of scalar components (1 for scalars, dim for vectors).
    fn components(&self) -> usize;
    fn raw(&self) -> &[f64];
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.num_cells();
        ScalarField { grid, data: vec![0.0; n] }
    }

    pub fn from_data(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.num_cells() {
            return Err(Error::GridMismatch(format!(
                "scalar data length {} != cell count {}",
                data.len(),
                grid.num_cells()
            )));
        }
        ensure_finite(&data, "scalar field data")?;
        Ok(ScalarField { grid, data })
    }

    /// Samples `f` at every cell center.
    pub fn sample(grid: Grid, f: impl Fn([f64; MAX_DIM]) -> f64) -> Result<Self> {
        let mut data = vec![0.0; grid.num_cells()];
        for lin in 0..grid.num_cells() {
            data[lin] = f(grid.cell_center(grid.unlinear(lin)));
        }
        ensure_finite(&data, "sampled scalar field")?;
        Ok(ScalarField { grid, data })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, lin: usize) -> f64 {
        self.data[lin]
    }

    pub fn max_abs(&self) -> f64 {
        crate::numeric::max_abs(&self.data)
    }

    /// Plain arithmetic mean over all cells.
    pub fn mean(&self) -> f64 {
        crate::numeric::tree_mean(&self.data)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField { grid: self.grid.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        let ncomp = grid.dim();
        let n = grid.num_cells();
        VectorField { grid, ncomp, data: vec![0.0; n * ncomp] }
    }

    pub fn from_components(components: Vec<ScalarField>) -> Result<Self> {
        let ncomp = components.len();
        if ncomp == 0 {
            return Err(Error::InvalidParameter("vector field needs components".into()));
        }
        let grid = components[0].grid.clone();
        let n = grid.num_cells();
        let mut data = Vec::with_capacity(n * ncomp);
        for c in &components {
            if c.grid != grid {
                return Err(Error::GridMismatch("vector components on different grids".into()));
            }
            data.extend_from_slice(&c.data);
        }
        Ok(VectorField { grid, ncomp, data })
    }

    pub fn from_data(grid: Grid, ncomp: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.num_cells() * ncomp {
            return Err(Error::GridMismatch(format!(
                "vector data length {} != {} cells x {} components",
                data.len(),
                grid.num_cells(),
                ncomp
            )));
        }
        ensure_finite(&data, "vector field data")?;
        Ok(VectorField { grid, ncomp, data })
    }

    /// Samples a vector-valued `f` at every cell center.
    pub fn sample(grid: Grid, f: impl Fn([f64; MAX_DIM]) -> [f64; MAX_DIM]) -> Result<Self> {
        let ncomp = grid.dim();
        let n = grid.num_cells();
        let mut data = vec![0.0; n * ncomp];
        for lin in 0..n {
            let v = f(grid.cell_center(grid.unlinear(lin)));
            for c in 0..ncomp {
                data[c * n + lin] = v[c];
            }
        }
        ensure_finite(&data, "sampled vector field")?;
        Ok(VectorField { grid, ncomp, data })
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.grid.num_cells();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid.num_cells();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn component_field(&self, c: usize) -> ScalarField {
        ScalarField { grid: self.grid.clone(), data: self.component(c).to_vec() }
    }

    pub fn vector_at(&self, lin: usize) -> [f64; MAX_DIM] {
        let n = self.grid.num_cells();
        let mut v = [0.0; MAX_DIM];
        for c in 0..self.ncomp {
            v[c] = self.data[c * n + lin];
        }
        v
    }

    /// |v|^2 per cell.
    pub fn norm2_field(&self) -> ScalarField {
        let n = self.grid.num_cells();
        let mut out = vec![0.0; n];
        for c in 0..self.ncomp {
            let comp = self.component(c);
            for (o, v) in out.iter_mut().zip(comp) {
                *o += v * v;
            }
        }
        ScalarField { grid: self.grid.clone(), data: out }
    }

    pub fn max_abs(&self) -> f64 {
        crate::numeric::max_abs(&self.data)
    }

    /// Largest |v| over cells.
    pub fn max_norm(&self) -> f64 {
        let n2 = self.norm2_field();
        n2.data.iter().fold(0.0_f64, |m, v| m.max(*v)).sqrt()
    }
}

impl HasGrid for ScalarField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn components(&self) -> usize {
        1
    }
    fn raw(&self) -> &[f64] {
        &self.data
    }
}

impl HasGrid for VectorField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn components(&self) -> usize {
        self.ncomp
    }
    fn raw(&self) -> &[f64] {
        &self.data
    }
}
