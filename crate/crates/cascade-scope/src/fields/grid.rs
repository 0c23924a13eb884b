//! Uniform rectilinear grids in 1-3 dimensions.
//!
//! Cell-centered: cell `i` along an axis sits at `origin + (i + 1/2) * spacing`.
//! Axes are independently periodic; quadrature windows wrap on periodic axes
//! and must stay inside the box on non-periodic ones.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    resolution: [usize; MAX_DIM],
    origin: [f64; MAX_DIM],
    extent: [f64; MAX_DIM],
    periodic: [bool; MAX_DIM],
}

impl Grid {
    /// Builds a grid, validating dimension 1..=3, resolution >= 4 per axis
    /// and positive extents. Unused trailing axes collapse to a single cell.
    pub fn new(
        dim: usize,
        resolution: &[usize],
        origin: &[f64],
        extent: &[f64],
        periodic: &[bool],
    ) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidParameter(format!("dim {dim} not in 1..=3")));
        }
        if resolution.len() != dim || origin.len() != dim || extent.len() != dim || periodic.len() != dim {
            return Err(Error::InvalidParameter("axis array lengths must equal dim".into()));
        }
        let mut res = [1usize; MAX_DIM];
        let mut org = [0.0; MAX_DIM];
        let mut ext = [1.0; MAX_DIM];
        let mut per = [true; MAX_DIM];
        for a in 0..dim {
            if resolution[a] < 4 {
                return Err(Error::InvalidParameter(format!(
                    "resolution {} on axis {a} below minimum 4",
                    resolution[a]
                )));
            }
            if !(extent[a] > 0.0 && extent[a].is_finite() && origin[a].is_finite()) {
                return Err(Error::InvalidParameter(format!("bad extent/origin on axis {a}")));
            }
            res[a] = resolution[a];
            org[a] = origin[a];
            ext[a] = extent[a];
            per[a] = periodic[a];
        }
        Ok(Grid { dim, resolution: res, origin: org, extent: ext, periodic: per })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self, axis: usize) -> usize {
        self.resolution[axis]
    }

    pub fn origin(&self, axis: usize) -> f64 {
        self.origin[axis]
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extent[axis]
    }

    pub fn periodic(&self, axis: usize) -> bool {
        self.periodic[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent[axis] / self.resolution[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).fold(f64::INFINITY, f64::min)
    }

    /// Volume of one cell (product of spacings over active axes).
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    pub fn num_cells(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn linear(&self, idx: [usize; MAX_DIM]) -> usize {
        (idx[0] * self.resolution[1] + idx[1]) * self.resolution[2] + idx[2]
    }

    pub fn unlinear(&self, lin: usize) -> [usize; MAX_DIM] {
        let nz = self.resolution[2];
        let ny = self.resolution[1];
        [lin / (ny * nz), (lin / nz) % ny, lin % nz]
    }

    pub fn cell_center(&self, idx: [usize; MAX_DIM]) -> [f64; MAX_DIM] {
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = self.origin[a] + (idx[a] as f64 + 0.5) * self.spacing(a);
        }
        x
    }

    /// Offset x - c, wrapped to [-L/2, L/2) on periodic axes.
    pub fn min_image_offset(&self, x: [f64; MAX_DIM], c: [f64; MAX_DIM]) -> [f64; MAX_DIM] {
        let mut d = [0.0; MAX_DIM];
        for a in 0..self.dim {
            let mut da = x[a] - c[a];
            if self.periodic[a] {
                let l = self.extent[a];
                da -= (da / l).round() * l;
            }
            d[a] = da;
        }
        d
    }

    pub fn min_image_dist2(&self, x: [f64; MAX_DIM], c: [f64; MAX_DIM]) -> f64 {
        let d = self.min_image_offset(x, c);
        (0..self.dim).map(|a| d[a] * d[a]).sum()
    }

    /// Errors unless the box [c - r, c + r] fits inside every non-periodic axis.
    pub fn check_support(&self, center: [f64; MAX_DIM], radius: f64) -> Result<()> {
        let tol = 1e-12;
        for a in 0..self.dim {
            if self.periodic[a] {
                continue;
            }
            let lo = self.origin[a];
            let hi = self.origin[a] + self.extent[a];
            let slack = tol * self.extent[a];
            if center[a] - radius < lo - slack || center[a] + radius > hi + slack {
                return Err(Error::SupportOutsideGrid(format!(
                    "ball (center {:.6}, radius {:.6}) exceeds axis {a} range [{:.6}, {:.6}]",
                    center[a], radius, lo, hi
                )));
            }
        }
        Ok(())
    }

    /// Cell indices along `axis` whose centers may lie within `radius` of
    /// `center[axis]`. Wraps on periodic axes; clamps otherwise.
    pub fn axis_window(&self, axis: usize, center: f64, radius: f64) -> Vec<usize> {
        let n = self.resolution[axis];
        let h = self.spacing(axis);
        if self.periodic[axis] && 2.0 * radius >= self.extent[axis] - h {
            return (0..n).collect();
        }
        let lo = ((center - radius - self.origin[axis]) / h - 0.5).ceil() as i64;
        let hi = ((center + radius - self.origin[axis]) / h - 0.5).floor() as i64;
        if self.periodic[axis] {
            (lo..=hi).map(|i| i.rem_euclid(n as i64) as usize).collect()
        } else {
            let lo = lo.max(0) as usize;
            let hi = hi.min(n as i64 - 1);
            if hi < lo as i64 {
                Vec::new()
            } else {
                (lo..=hi as usize).collect()
            }
        }
    }

    /// Iterates cells of the axis-aligned window around `center` with
    /// half-width `radius`, yielding (linear index, min-image offset).
    pub fn for_each_window_cell(
        &self,
        center: [f64; MAX_DIM],
        radius: f64,
        mut f: impl FnMut(usize, [f64; MAX_DIM]),
    ) {
        let wins: Vec<Vec<usize>> = (0..self.dim)
            .map(|a| self.axis_window(a, center[a], radius))
            .collect();
        let unit = vec![0usize];
        let wx = &wins[0];
        let wy = if self.dim > 1 { &wins[1] } else { &unit };
        let wz = if self.dim > 2 { &wins[2] } else { &unit };
        for &i in wx {
            for &j in wy {
                for &k in wz {
                    let idx = [i, j, k];
                    let x = self.cell_center(idx);
                    let d = self.min_image_offset(x, center);
                    f(self.linear(idx), d);
                }
            }
        }
    }

    pub fn same_geometry(&self, other: &Grid) -> bool {
        self == other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1d() -> Grid {
        Grid::new(1, &[4096], &[-10.0], &[20.0], &[false]).unwrap()
    }

    #[test]
    fn spacing_matches_extent_over_resolution() {
        let g = g1d();
        assert_eq!(g.spacing(0), 20.0 / 4096.0);
        assert_eq!(g.num_cells(), 4096);
    }

    #[test]
    fn rejects_resolution_below_four() {
        assert!(Grid::new(1, &[3], &[0.0], &[1.0], &[false]).is_err());
    }

    #[test]
    fn rejects_zero_extent() {
        assert!(Grid::new(1, &[8], &[0.0], &[0.0], &[false]).is_err());
    }

    #[test]
    fn linear_unlinear_roundtrip() {
        let g = Grid::new(3, &[4, 6, 8], &[0.0; 3], &[1.0; 3], &[true; 3]).unwrap();
        for lin in 0..g.num_cells() {
            assert_eq!(g.linear(g.unlinear(lin)), lin);
        }
    }

    #[test]
    fn min_image_wraps_periodic_axis() {
        let g = Grid::new(1, &[8], &[0.0], &[8.0], &[true]).unwrap();
        let d = g.min_image_offset([7.5, 0.0, 0.0], [0.5, 0.0, 0.0]);
        assert!((d[0] - (-1.0)).abs() < 1e-14);
    }

    #[test]
    fn support_check_honours_periodicity() {
        let g = g1d();
        assert!(g.check_support([9.0, 0.0, 0.0], 2.0).is_err());
        assert!(g.check_support([0.0, 0.0, 0.0], 9.0).is_ok());
        let gp = Grid::new(1, &[8], &[-1.0], &[2.0], &[true]).unwrap();
        assert!(gp.check_support([0.9, 0.0, 0.0], 0.5).is_ok());
    }

    #[test]
    fn window_covers_expected_cells() {
        let g = g1d();
        let h = g.spacing(0);
        let win = g.axis_window(0, 0.0, 1.0);
        // centers strictly within [-1, 1]
        for &i in &win {
            let x = g.origin(0) + (i as f64 + 0.5) * h;
            assert!(x.abs() <= 1.0 + 1e-12);
        }
        let lo = *win.first().unwrap();
        let hi = *win.last().unwrap();
        assert!(g.origin(0) + (lo as f64 - 0.5) * h < -1.0);
        assert!(g.origin(0) + (hi as f64 + 1.5) * h > 1.0);
    }
}
